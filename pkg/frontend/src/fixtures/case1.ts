import type { AnalysisResult, IngestResponse, SaliencyResponse } from "../types";

// One recorded service conversation about the solar-system passage,
// used by the tests to mock the network layer with realistic payloads.

export const CASE1_TEXT =
  "The sun is a star. It is the center of our solar system. The sun is a planet. All planets revolve around it.";

export const CASE1_INGEST: IngestResponse = {
  "doc_id": "26f34272cf767d8208cb39569ee2f99dbfd8017faa3a4d027a99c361529e2289",
  "sentences": [
    {
      "index": 0,
      "char_start": 0,
      "char_end": 18,
      "token_start": 0,
      "token_end": 5
    },
    {
      "index": 1,
      "char_start": 19,
      "char_end": 56,
      "token_start": 5,
      "token_end": 13
    },
    {
      "index": 2,
      "char_start": 57,
      "char_end": 77,
      "token_start": 13,
      "token_end": 18
    },
    {
      "index": 3,
      "char_start": 78,
      "char_end": 108,
      "token_start": 18,
      "token_end": 23
    }
  ],
  "cached": false,
  "timings": {
    "attention_ms": 0.0,
    "saliency_ms": 0.0
  }
};

export const CASE1_SALIENCY: SaliencyResponse = {
  "n": 4,
  "matrix": [
    [
      0.2,
      0.0,
      0.0,
      0.0
    ],
    [
      0.10999999940395355,
      0.05624999850988388,
      0.0,
      0.0
    ],
    [
      0.12880000472068787,
      0.009999999776482582,
      0.055199998617172244,
      0.0
    ],
    [
      0.00800000037997961,
      0.006000000052154064,
      0.004000000189989805,
      0.1784000039100647
    ]
  ],
  "stats": {
    "mean": 0.04446666742054125,
    "std": 0.0532943618339688,
    "included": "off_diagonal_nonzero"
  }
};

export const CASE1_ANALYZE_T0: AnalysisResult = {
  "doc_id": "26f34272cf767d8208cb39569ee2f99dbfd8017faa3a4d027a99c361529e2289",
  "target": 0,
  "policy": {
    "mode": "relative",
    "params": {
      "k": 1.0
    },
    "direction": "max_both"
  },
  "stats": {
    "mean": 0.04446666742054125,
    "std": 0.0532943618339688
  },
  "annotations": [
    {
      "index": 1,
      "role": "premise",
      "saliency": 0.10999999940395355,
      "nli_confidence": 0.912,
      "passed_fusion": true
    },
    {
      "index": 2,
      "role": "contradiction",
      "saliency": 0.12880000472068787,
      "nli_confidence": 0.959,
      "passed_fusion": true
    }
  ],
  "timings": {
    "attention_ms": 0.0,
    "saliency_ms": 0.0,
    "nli_ms": 0.0
  }
};

export const CASE1_ANALYZE_T3: AnalysisResult = {
  "doc_id": "26f34272cf767d8208cb39569ee2f99dbfd8017faa3a4d027a99c361529e2289",
  "target": 3,
  "policy": {
    "mode": "relative",
    "params": {
      "k": 1.0
    },
    "direction": "max_both"
  },
  "stats": {
    "mean": 0.04446666742054125,
    "std": 0.0532943618339688
  },
  "annotations": [],
  "timings": {
    "attention_ms": 0.0,
    "saliency_ms": 0.0,
    "nli_ms": 0.0
  }
};

export const CASE1_REFILTER_MAX: AnalysisResult = {
  "doc_id": "26f34272cf767d8208cb39569ee2f99dbfd8017faa3a4d027a99c361529e2289",
  "target": 0,
  "policy": {
    "mode": "relative",
    "params": {
      "k": 5.0
    },
    "direction": "max_both"
  },
  "stats": {
    "mean": 0.04446666742054125,
    "std": 0.0532943618339688
  },
  "annotations": [
    {
      "index": 1,
      "role": "premise",
      "saliency": 0.10999999940395355,
      "nli_confidence": 0.912,
      "passed_fusion": false
    },
    {
      "index": 2,
      "role": "contradiction",
      "saliency": 0.12880000472068787,
      "nli_confidence": 0.959,
      "passed_fusion": false
    }
  ],
  "timings": {
    "attention_ms": 0.0,
    "saliency_ms": 0.0,
    "nli_ms": 0.0
  }
};

export const CASE1_REFILTER_K1: AnalysisResult = {
  "doc_id": "26f34272cf767d8208cb39569ee2f99dbfd8017faa3a4d027a99c361529e2289",
  "target": 0,
  "policy": {
    "mode": "relative",
    "params": {
      "k": 1.0
    },
    "direction": "max_both"
  },
  "stats": {
    "mean": 0.04446666742054125,
    "std": 0.0532943618339688
  },
  "annotations": [
    {
      "index": 1,
      "role": "premise",
      "saliency": 0.10999999940395355,
      "nli_confidence": 0.912,
      "passed_fusion": true
    },
    {
      "index": 2,
      "role": "contradiction",
      "saliency": 0.12880000472068787,
      "nli_confidence": 0.959,
      "passed_fusion": true
    }
  ],
  "timings": {
    "attention_ms": 0.0,
    "saliency_ms": 0.0,
    "nli_ms": 0.0
  }
};
