"""Global stream: shared/unique subspace decomposition of pooled features.

A shared projection W maps both modalities' pooled features into the
invariant subspace; per-modality projections P_image / P_text map into
the variant subspaces. The global representation concatenates a
configurable subset of {invariant, variant, raw} features per modality.
Two training penalties live here: the invariant loss pulls the two
modalities' shared projections together, and the orthogonality loss
pushes the shared and unique projection rows apart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as tc
from .tensor import Tensor

# Global-representation variants: the concatenation order of each tuple is
# the order the features appear in, and variant names map 1:1 to the seven
# supported fusion configurations.
FUSION_VARIANTS = {
    "inv": ("inv_img", "inv_txt"),
    "var": ("var_img", "var_txt"),
    "raw": ("raw_img", "raw_txt"),
    "var+raw": ("var_img", "var_txt", "raw_img", "raw_txt"),
    "inv+raw": ("inv_img", "inv_txt", "raw_img", "raw_txt"),
    "inv+var": ("var_img", "inv_img", "inv_txt", "var_txt"),
    "all": ("var_img", "inv_img", "inv_txt", "var_txt", "raw_img", "raw_txt"),
}

DEFAULT_VARIANT = "inv"


@dataclass
class AssociationParams:
    W: Tensor        # (d_inv, d) shared projection
    P_image: Tensor  # (d_var, d)
    P_text: Tensor   # (d_var, d)

    @property
    def d_inv(self) -> int:
        return self.W.shape[0]

    @property
    def d_var(self) -> int:
        return self.P_image.shape[0]


@dataclass
class DecomposedFeatures:
    f_image_inv: Tensor
    f_text_inv: Tensor
    f_image_var: Tensor
    f_text_var: Tensor
    f_image: Tensor
    f_text: Tensor

    def _part(self, key: str) -> Tensor:
        return {
            "inv_img": self.f_image_inv, "inv_txt": self.f_text_inv,
            "var_img": self.f_image_var, "var_txt": self.f_text_var,
            "raw_img": self.f_image, "raw_txt": self.f_text,
        }[key]


def init_association_params(d: int, d_inv: int, d_var: int, rng) -> AssociationParams:
    def proj(rows):
        bound = 1.0 / np.sqrt(d)
        return Tensor(rng.uniform(-bound, bound, size=(rows, d)), requires_grad=True)

    return AssociationParams(W=proj(d_inv), P_image=proj(d_var), P_text=proj(d_var))


def decompose(f: Tensor, params: AssociationParams, modality: str):
    """Project a pooled feature into (invariant, variant) parts."""
    if modality not in ("image", "text"):
        raise ValueError(f"modality must be 'image' or 'text', got {modality!r}")
    p = params.P_image if modality == "image" else params.P_text
    return tc.matmul(params.W, f), tc.matmul(p, f)


def decompose_pair(f_image: Tensor, f_text: Tensor,
                   params: AssociationParams) -> DecomposedFeatures:
    img_inv, img_var = decompose(f_image, params, "image")
    txt_inv, txt_var = decompose(f_text, params, "text")
    return DecomposedFeatures(
        f_image_inv=img_inv, f_text_inv=txt_inv,
        f_image_var=img_var, f_text_var=txt_var,
        f_image=f_image, f_text=f_text,
    )


def build_global(decomp: DecomposedFeatures, variant: str = DEFAULT_VARIANT) -> Tensor:
    """Concatenate the variant's features, in the variant's listed order."""
    if variant not in FUSION_VARIANTS:
        raise ValueError(
            f"unknown fusion variant {variant!r}; choose from {sorted(FUSION_VARIANTS)}"
        )
    keys = FUSION_VARIANTS[variant]
    return tc.concat([decomp._part(k) for k in keys])


def global_length(variant: str, d: int, d_inv: int, d_var: int) -> int:
    """Length of r_g for a variant, from the configured dimensions."""
    if variant not in FUSION_VARIANTS:
        raise ValueError(
            f"unknown fusion variant {variant!r}; choose from {sorted(FUSION_VARIANTS)}"
        )
    sizes = {"inv": d_inv, "var": d_var, "raw": d}
    return sum(sizes[k.split("_")[0]] for k in FUSION_VARIANTS[variant])


def invariant_loss(f_image_inv: Tensor, f_text_inv: Tensor) -> Tensor:
    """Euclidean distance between the two shared-subspace projections."""
    return tc.fro_norm(tc.sub(f_image_inv, f_text_inv))


def orthogonal_loss(params: AssociationParams) -> Tensor:
    """Sum over modalities of the Frobenius norm of W P_m^T.

    Zero exactly when every row of W is orthogonal to every row of both
    unique projections.
    """
    o_img = tc.fro_norm(tc.matmul(params.W, tc.transpose(params.P_image)))
    o_txt = tc.fro_norm(tc.matmul(params.W, tc.transpose(params.P_text)))
    return tc.add(o_img, o_txt)
