"""Causal-LM attention extraction via transformers.

Imports torch/transformers lazily so the rest of the package works in
environments without model dependencies. One forward pass per document;
attention is taken from one layer and reduced over heads.
"""

from __future__ import annotations

import threading

import numpy as np

from ..docmodel import Document, TokenAlignment
from ..errors import BackendUnavailable, DocumentTooLong
from .types import ProviderConfig, TokenAttention


class ModelAttentionProvider:
    """Extracts head-reduced attention from a pretrained causal LM.

    Inference state is mutable, so calls are serialized per instance; the
    service layer owns pooling. Loading is deferred to the first request.
    """

    provider_id = "model"

    def __init__(self, config: ProviderConfig):
        self.config = config
        self._lock = threading.Lock()
        self._model = None
        self._tokenizer = None
        self._load_error: str | None = None

    def _load(self):
        if self._model is not None:
            return
        try:
            import torch
            from transformers import AutoModelForCausalLM, AutoTokenizer
        except ImportError as exc:
            self._load_error = str(exc)
            raise BackendUnavailable(
                "model backend needs the [models] extra (torch, transformers)",
                diagnostics=str(exc)) from exc
        try:
            torch.manual_seed(0)
            self._tokenizer = AutoTokenizer.from_pretrained(self.config.model_id)
            self._model = AutoModelForCausalLM.from_pretrained(
                self.config.model_id,
                attn_implementation="eager",  # required for output_attentions
                torch_dtype=torch.float32,
            ).to(self.config.device)
            self._model.eval()
        except Exception as exc:
            self._load_error = str(exc)
            raise BackendUnavailable(
                f"failed to load {self.config.model_id}", diagnostics=str(exc)) from exc

    def get_attention(self, doc: Document) -> tuple[TokenAttention, TokenAlignment]:
        with self._lock:
            self._load()
            import torch

            encoded = self._tokenizer(
                doc.text,
                return_offsets_mapping=True,
                return_special_tokens_mask=True,
                return_tensors="pt",
            )
            n = encoded["input_ids"].shape[1]
            if n > self.config.max_tokens:
                raise DocumentTooLong(
                    f"{n} tokens exceeds max_tokens={self.config.max_tokens}")

            offsets = [tuple(int(x) for x in pair)
                       for pair in encoded["offset_mapping"][0].tolist()]
            specials = tuple(bool(int(x)) for x in encoded["special_tokens_mask"][0].tolist())

            try:
                with torch.no_grad():
                    out = self._model(
                        input_ids=encoded["input_ids"].to(self.config.device),
                        attention_mask=encoded["attention_mask"].to(self.config.device),
                        output_attentions=True,
                    )
            except Exception as exc:
                raise BackendUnavailable(
                    "attention forward pass failed", diagnostics=str(exc)) from exc

            n_layers = len(out.attentions)
            layer = self.config.layer_index
            if layer is None:
                layer = n_layers - 1
            if not 0 <= layer < n_layers:
                raise BackendUnavailable(
                    f"layer_index {layer} outside model depth {n_layers}")

            heads = out.attentions[layer][0]  # (heads, n, n)
            if self.config.head_reduction == "mean":
                reduced = heads.mean(dim=0)
            elif self.config.head_reduction == "max":
                reduced = heads.max(dim=0).values
            else:
                if not 0 <= self.config.head_index < heads.shape[0]:
                    raise BackendUnavailable(
                        f"head_index {self.config.head_index} outside {heads.shape[0]} heads")
                reduced = heads[self.config.head_index]

            matrix = np.asarray(reduced.cpu().numpy(), dtype=np.float32)
            # Numerical noise can leave tiny values above the diagonal.
            matrix = np.tril(matrix)

        att = TokenAttention(
            matrix=matrix,
            layer_index=layer,
            head_reduction=self.config.head_reduction,
            provider_id=f"model:{self.config.model_id}",
            special_token_mask=specials,
        )
        alignment = TokenAlignment(tuple(offsets), specials)
        return att, alignment

    def describe(self) -> dict:
        if self._load_error:
            status = "unavailable"
        elif self._model is not None:
            status = "ok"
        else:
            status = "ok"  # optimistic until a load attempt fails
        return {"backend": "model", "status": status, "model_id": self.config.model_id,
                **({"error": self._load_error} if self._load_error else {})}
