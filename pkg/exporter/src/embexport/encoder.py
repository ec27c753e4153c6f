"""Pretrained speech encoder behind a small surface.

The encoder id may be a hub model id or a local directory; both go through
from_pretrained. Only the encoder half of the model runs. Each window is
converted to log-mel features by the model's feature extractor, which pads
short windows to the encoder's fixed input span, and the hidden states come
back as one (frames, dim) array for the caller to pool.
"""

import numpy as np

from .errors import EncoderUnavailable


class Encoder:
    def __init__(self, encoder_id, version, fe, model, torch_mod):
        self.encoder_id = encoder_id
        self.version = version
        self.rate = int(fe.sampling_rate)
        self.dim = int(model.config.d_model)
        self._fe = fe
        self._model = model
        self._torch = torch_mod

    def encode(self, window: np.ndarray) -> np.ndarray:
        """Frame-level embeddings for one window, shape (frames, dim)."""
        feats = self._fe(
            window, sampling_rate=self.rate, return_tensors="pt"
        ).input_features
        with self._torch.no_grad():
            out = self._model.encoder(feats).last_hidden_state
        return out.squeeze(0).numpy()


def load_encoder(encoder_id: str) -> Encoder:
    try:
        import torch
        import transformers
        from transformers import WhisperFeatureExtractor, WhisperModel
    except ImportError as exc:
        raise EncoderUnavailable(f"encoder runtime not importable: {exc}") from exc
    transformers.utils.logging.disable_progress_bar()
    try:
        model = WhisperModel.from_pretrained(encoder_id)
        fe = WhisperFeatureExtractor.from_pretrained(encoder_id)
    except (OSError, ValueError) as exc:
        raise EncoderUnavailable(f"cannot load {encoder_id!r}: {exc}") from exc
    model.eval()
    return Encoder(encoder_id, transformers.__version__, fe, model, torch)
