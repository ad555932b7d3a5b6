"""Release gate: exported datasets must be consumable by the classifier.

The exporter never imports the consumer package; these tests close the
loop from the outside by loading an exported fixture with ananet's data
loader and training its model on the result for two epochs.
"""

import numpy as np

from ananet.config import RunConfig
from ananet.data import load_dataset
from ananet.model import Model
from ananet.trainer import evaluate, train


def test_five_pair_export_passes_loader_validation_and_trains(exported):
    out, result = exported
    assert result.written == 5 and result.skipped == []

    # load_dataset re-validates every manifest line and matrix shape
    records = load_dataset(result.manifest)
    assert [r.label for r in records] == [2, 1, 0, 1, 0]
    for record in records:
        assert record.K == 36
        assert record.region_feats.shape == (36, 1024)
        assert record.word_vecs.shape == (record.N, 200)
        assert record.ctx_vecs.shape == (record.N, 768)

    # two full epochs end to end on the exported features
    cfg = RunConfig(d=64, d_r=1024, d_G=200, d_B=768, d_inv=16, d_var=16,
                    K=36, N_max=100, batch=8, epochs=2, seed=1)
    model = Model(cfg, variant="full")
    outcome = train(model, records, records)
    assert len(outcome.history) == 2
    for row in outcome.history:
        assert np.isfinite(row["L"]) and np.isfinite(row["dev_acc"])

    report = evaluate(outcome.model, records)
    assert int(np.asarray(report.confusion).sum()) == 5
