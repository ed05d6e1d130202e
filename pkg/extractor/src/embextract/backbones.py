"""Supported backbones: construction, head removal, canonical preprocessing.

Each model is built from torchvision and its classification layer is
replaced with an identity, so the forward pass emits the penultimate
feature vector. Feature widths are never hardcoded; callers read them off
the first batch.
"""

from __future__ import annotations

import torch
from torch import nn
from torchvision.models import get_model, get_model_weights


def _strip_classifier_tail(model: nn.Module) -> None:
    model.classifier[-1] = nn.Identity()


def _strip_fc(model: nn.Module) -> None:
    model.fc = nn.Identity()


def _strip_vit_head(model: nn.Module) -> None:
    model.heads.head = nn.Identity()


def _strip_swin_head(model: nn.Module) -> None:
    model.head = nn.Identity()


# extractor name -> (torchvision model name, head remover)
BACKBONES = {
    "mnet_v3_large": ("mobilenet_v3_large", _strip_classifier_tail),
    "efficientnet_v2_l": ("efficientnet_v2_l", _strip_classifier_tail),
    "resnet152": ("resnet152", _strip_fc),
    "wide_resnet101_2": ("wide_resnet101_2", _strip_fc),
    "vit_b_16": ("vit_b_16", _strip_vit_head),
    "swin_v2_b": ("swin_v2_b", _strip_swin_head),
}


class UnknownBackboneError(ValueError):
    pass


def build_backbone(name: str, pretrained: bool = True, seed: int = 0):
    """Return (model, transforms) with the classification layer removed.

    With ``pretrained=False`` the weights are randomly initialized from the
    given seed (useful offline; features are meaningless but the pipeline
    and format behave identically). Preprocessing always follows the
    backbone's published inference transforms.
    """
    if name not in BACKBONES:
        raise UnknownBackboneError(
            f"unknown backbone {name!r}; supported: {sorted(BACKBONES)}"
        )
    tv_name, strip_head = BACKBONES[name]
    weights = get_model_weights(tv_name).DEFAULT
    transforms = weights.transforms()
    if pretrained:
        model = get_model(tv_name, weights=weights)
    else:
        torch.manual_seed(seed)
        model = get_model(tv_name, weights=None)
    strip_head(model)
    model.eval()
    return model, transforms
