"""Inception-v3 embedding model: weight resolution and pooled features.

The embedding is the output of the final pooling layer before the fully
connected head, a 2048-vector per image; it sits downstream of ReLU
activations, so every component is nonnegative.  The weights in use are
pinned by a SHA-256 over the state dict and recorded in the output
trailer, keeping extractions comparable across runs and machines.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import torch
from torchvision.models import Inception_V3_Weights, inception_v3
from torchvision.transforms import functional as tvf

FEATURE_DIM = 2048

# Published input pipeline of the torchvision checkpoint; also used for
# the offline modes so files stay comparable within a weights choice.
RESIZE_TO = 342
CROP_TO = 299
NORM_MEAN = (0.485, 0.456, 0.406)
NORM_STD = (0.229, 0.224, 0.225)

PREPROCESSING_NOTE = (
    f"rgb|resize{RESIZE_TO}-bilinear-antialias|centercrop{CROP_TO}"
    f"|scale[0,1]|normalize(mean={NORM_MEAN},std={NORM_STD})"
)


def _calibrate_batchnorm(net, seed: int, batch: int = 8) -> None:
    """One deterministic stats pass for randomly initialized weights.

    Fresh batch-norm layers carry running stats of (0, 1); in eval mode
    they do not normalize anything, so random conv stacks amplify
    activations by a few orders of magnitude per stage and the pooled
    features land near the float32 ceiling.  A single train-mode forward
    pass over a seeded input batch (momentum=None, i.e. plain averaging)
    replaces the placeholder stats with data-driven ones and keeps the
    feature scale tame.  Seed-deterministic, eval behavior afterwards.
    """
    for module in net.modules():
        if isinstance(module, torch.nn.BatchNorm2d):
            module.momentum = None
    generator = torch.Generator().manual_seed(seed)
    probe = torch.rand((batch, 3, CROP_TO, CROP_TO), generator=generator)
    net.train()
    with torch.no_grad():
        net(probe)
    net.eval()


def state_dict_sha256(state_dict: dict) -> str:
    digest = hashlib.sha256()
    for name in sorted(state_dict):
        digest.update(name.encode("utf-8"))
        digest.update(state_dict[name].detach().cpu().contiguous().numpy().tobytes())
    return digest.hexdigest()


class EmbeddingModel:
    """Pooled-feature Inception-v3 wrapper with a pinned weight hash."""

    def __init__(self, weights: str = "pretrained", seed: int = 0, device: str = "cpu"):
        self.weights_spec = weights
        self.device = torch.device(device)
        if weights == "pretrained":
            net = inception_v3(weights=Inception_V3_Weights.IMAGENET1K_V1)
        elif weights == "random":
            # Seeded random initialization: a documented offline mode for
            # pipeline testing; NOT comparable to pretrained embeddings.
            torch.manual_seed(seed)
            net = inception_v3(weights=None, aux_logits=True, init_weights=True)
            _calibrate_batchnorm(net, seed)
        else:
            torch.manual_seed(seed)
            net = inception_v3(weights=None, aux_logits=True, init_weights=True)
            state = torch.load(Path(weights), map_location="cpu", weights_only=True)
            net.load_state_dict(state)
        net.eval()
        self.weight_hash = state_dict_sha256(net.state_dict())
        self._net = net.to(self.device)
        self._pooled: torch.Tensor | None = None
        self._net.avgpool.register_forward_hook(self._capture)

    def _capture(self, module, inputs, output):
        self._pooled = output

    def preprocess(self, image) -> torch.Tensor:
        """PIL image to a normalized CHW tensor per the published pipeline."""
        image = image.convert("RGB")
        tensor = tvf.pil_to_tensor(image)
        tensor = tvf.resize(tensor, [RESIZE_TO], antialias=True)
        tensor = tvf.center_crop(tensor, [CROP_TO])
        tensor = tvf.convert_image_dtype(tensor, torch.float32)
        return tvf.normalize(tensor, list(NORM_MEAN), list(NORM_STD))

    @torch.no_grad()
    def embed_batch(self, batch: torch.Tensor) -> torch.Tensor:
        """(N, 3, 299, 299) float batch to (N, 2048) pooled features."""
        self._pooled = None
        self._net(batch.to(self.device))
        if self._pooled is None:
            raise RuntimeError("pooling layer hook was not triggered")
        return self._pooled.flatten(start_dim=1).cpu()

    def describe(self) -> str:
        return (f"model=inception_v3 weights={self.weights_spec} "
                f"sha256={self.weight_hash} preprocessing={PREPROCESSING_NOTE}")
