"""Whole-network assembly: parameters, per-pair forward pass, persistence.

A model owns one parameter set covering both streams plus the plain
concatenation head, so every structural variant initializes identically
from the same seed; the variant only gates which pieces the forward pass
uses and therefore which parameters receive gradients.

Variants:
  full              both streams, all three loss terms
  association_only  global stream only; invariant/orthogonality terms kept
  alignment_only    local stream only; classification loss only
  concat_only       [f_image ++ f_text] through a fresh linear head
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from . import alignment, association, encoders, fusion
from . import tensor as tc
from .anaf import DTYPE_F64, FormatError, read_anaf, write_anaf
from .config import RunConfig, config_from_dict, config_to_dict
from .tensor import Tensor

VARIANTS = ("full", "association_only", "alignment_only", "concat_only")

MODEL_MAGIC = b"ANAM"
MODEL_VERSION = 1


@dataclass
class PairForward:
    prediction: fusion.Prediction
    losses: fusion.LossBundle
    modal: encoders.ModalState
    align: alignment.AlignmentState | None
    decomp: association.DecomposedFeatures | None


class Model:
    def __init__(self, config: RunConfig, variant: str = "full", seed: int | None = None):
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")
        config.validate()
        self.config = config
        self.variant = variant
        seed = config.seed if seed is None else seed
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0xA11A]))
        self.encoder = encoders.init_encoder_params(
            config.d, config.d_r, config.d_G, config.d_B, rng)
        self.association = association.init_association_params(
            config.d, config.d_inv, config.d_var, rng)
        len_rg = association.global_length(
            config.fusion_variant, config.d, config.d_inv, config.d_var)
        self.fusion = fusion.init_fusion_params(
            len_rg, config.K + config.N_max, rng, lam=config.lam, eta=config.eta)
        bound = 1.0 / np.sqrt(2 * config.d)
        self.w_c = Tensor(rng.uniform(-bound, bound, size=(fusion.N_CLASSES, 2 * config.d)),
                          requires_grad=True)
        self.b_c = Tensor(np.zeros(fusion.N_CLASSES), requires_grad=True)

    # ----------------------------------------------------------------- params

    def parameters(self):
        """Stable (name, tensor) ordering; also the model-file tensor order."""
        out = [("encoder.w_v", self.encoder.w_v), ("encoder.b_v", self.encoder.b_v)]
        for direction in ("fwd", "bwd"):
            cell = getattr(self.encoder, direction)
            for field in encoders.GRU_FIELDS:
                out.append((f"encoder.{direction}.{field}", getattr(cell, field)))
        out += [
            ("association.W", self.association.W),
            ("association.P_image", self.association.P_image),
            ("association.P_text", self.association.P_text),
            ("fusion.w_g", self.fusion.w_g), ("fusion.b_g", self.fusion.b_g),
            ("fusion.w_l", self.fusion.w_l), ("fusion.b_l", self.fusion.b_l),
            ("concat.w_c", self.w_c), ("concat.b_c", self.b_c),
        ]
        return out

    def zero_grad(self):
        for _, p in self.parameters():
            p.zero_grad()

    # ---------------------------------------------------------------- forward

    def _check_record(self, record):
        if record.K != self.config.K:
            raise tc.ShapeError(
                f"record {record.id} has K={record.K} but model expects K={self.config.K}"
            )
        if record.region_feats.shape[1] != self.config.d_r:
            raise tc.ShapeError(
                f"record {record.id} has d_r={record.region_feats.shape[1]} "
                f"but model expects d_r={self.config.d_r}"
            )

    def _padded_local(self, align_state: alignment.AlignmentState) -> Tensor:
        """r_l padded to K + N_max so the fixed local head always fits.

        Token indicators occupy the first N_max slots (zeros past the true
        N mean "no relevance"), region indicators the last K.
        """
        n = align_state.N
        if n == self.config.N_max:
            return align_state.r_l
        pad = Tensor(np.zeros(self.config.N_max - n))
        return tc.concat([align_state.t_bar, pad, align_state.v_bar])

    def forward(self, record) -> PairForward:
        self._check_record(record)
        cfg = self.config
        modal = encoders.encode_pair(record, self.encoder, n_max=cfg.N_max)

        if self.variant == "concat_only":
            r = tc.concat([modal.f_image, modal.f_text])
            pred = fusion.prediction_from_logits(
                fusion.stream_logits(self.w_c, r, self.b_c))
            l_c = fusion.classification_loss(pred, record.label)
            zero = Tensor(0.0)
            return PairForward(pred, fusion.loss_bundle(l_c, zero, zero, cfg.alpha, cfg.beta),
                               modal, None, None)

        use_assoc = self.variant in ("full", "association_only")
        use_align = self.variant in ("full", "alignment_only")

        decomp = None
        align_state = None
        logits = None
        if use_assoc:
            decomp = association.decompose_pair(modal.f_image, modal.f_text, self.association)
            r_g = association.build_global(decomp, cfg.fusion_variant)
            logits = cfg.lam * fusion.stream_logits(self.fusion.w_g, r_g, self.fusion.b_g)
        if use_align:
            align_state = alignment.align_pair(modal.V, modal.T, axis=cfg.attention_axis)
            local = cfg.eta * fusion.stream_logits(
                self.fusion.w_l, self._padded_local(align_state), self.fusion.b_l)
            logits = local if logits is None else tc.add(logits, local)

        pred = fusion.prediction_from_logits(logits)
        l_c = fusion.classification_loss(pred, record.label)
        if use_assoc:
            l_i = association.invariant_loss(decomp.f_image_inv, decomp.f_text_inv)
            l_o = association.orthogonal_loss(self.association)
        else:
            l_i = Tensor(0.0)
            l_o = Tensor(0.0)
        return PairForward(pred, fusion.loss_bundle(l_c, l_i, l_o, cfg.alpha, cfg.beta),
                           modal, align_state, decomp)

    def batch_loss(self, records):
        """Mean per-pair loss over a mini-batch, plus logged components.

        The orthogonality term depends only on parameters, so its batch
        mean equals one evaluation; it is added once.
        """
        if not records:
            raise ValueError("empty batch")
        cfg = self.config
        use_assoc = self.variant in ("full", "association_only")
        per_pair = []
        l_c_sum = 0.0
        l_i_sum = 0.0
        for record in records:
            out = self.forward(record)
            term = out.losses.L_c
            if use_assoc:
                term = tc.add(term, cfg.alpha * out.losses.L_i)
            per_pair.append(term)
            l_c_sum += out.losses.L_c.item()
            l_i_sum += out.losses.L_i.item()
        total = per_pair[0]
        for term in per_pair[1:]:
            total = tc.add(total, term)
        total = (1.0 / len(records)) * total
        if use_assoc:
            l_o = association.orthogonal_loss(self.association)
            total = tc.add(total, cfg.beta * l_o)
            l_o_value = l_o.item()
        else:
            l_o_value = 0.0
        components = {
            "L": total.item(),
            "L_c": l_c_sum / len(records),
            "L_i": l_i_sum / len(records),
            "L_o": l_o_value,
        }
        return total, components

    def predict(self, record) -> fusion.Prediction:
        with tc.no_grad():
            return self.forward(record).prediction

    # ------------------------------------------------------------ persistence

    def state_arrays(self):
        return [(name, p.data) for name, p in self.parameters()]

    def save(self, path):
        header = {
            "format": "anam",
            "version": MODEL_VERSION,
            "variant": self.variant,
            "config": config_to_dict(self.config),
            "tensors": [[name, list(p.data.shape)] for name, p in self.parameters()],
        }
        blob = json.dumps(header, sort_keys=True).encode("utf-8")
        with open(path, "wb") as f:
            f.write(MODEL_MAGIC)
            f.write(struct.pack("<HI", MODEL_VERSION, len(blob)))
            f.write(blob)
            for _, p in self.parameters():
                write_anaf(f, p.data, DTYPE_F64)

    @classmethod
    def load(cls, path) -> "Model":
        with open(path, "rb") as f:
            magic = f.read(4)
            if magic != MODEL_MAGIC:
                raise FormatError(f"bad model magic {magic!r}, expected {MODEL_MAGIC!r}", 0)
            head = f.read(6)
            if len(head) != 6:
                raise FormatError("truncated model header", 4)
            version, json_len = struct.unpack("<HI", head)
            if version != MODEL_VERSION:
                raise FormatError(f"unsupported model version {version}", 4)
            blob = f.read(json_len)
            if len(blob) != json_len:
                raise FormatError("truncated model header JSON", 10)
            try:
                header = json.loads(blob.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as e:
                raise FormatError(f"bad model header JSON: {e}", 10) from e
            model = cls(config_from_dict(header["config"]), variant=header["variant"])
            params = dict(model.parameters())
            for name, shape in header["tensors"]:
                if name not in params:
                    raise FormatError(f"unknown tensor {name!r} in model file", f.tell())
                arr = read_anaf(f)
                if list(arr.shape) != shape or arr.shape != params[name].data.shape:
                    raise FormatError(
                        f"tensor {name!r} has shape {list(arr.shape)}, expected {shape}",
                        f.tell(),
                    )
                params[name].data[...] = arr
        return model
