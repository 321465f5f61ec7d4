import type { AnalysisResult, Annotation, SaliencyStats, SentenceSpan } from "./types";

/** Display treatment for one sentence span. */
export type Tone = "plain" | "target" | "premise" | "contradiction" | "candidate";

export interface SentenceView {
  index: number;
  text: string;
  tone: Tone;
}

/** Relative-mode selection threshold: mean + k·std, clamped at zero. */
export function relativeThreshold(stats: SaliencyStats, k: number): number {
  return Math.max(0, stats.mean + k * stats.std);
}

/**
 * Recompute `passed_fusion` locally for a new slider value, using only the
 * saliency fields already present in the result. This mirrors the server's
 * relative-mode gate (saliency at or above the threshold, and strictly
 * positive) so the view can update instantly while the authoritative
 * refilter request is still in flight.
 */
export function refilterLocally(result: AnalysisResult, k: number): Annotation[] {
  const tau = relativeThreshold(result.stats, k);
  return result.annotations.map((a) => ({
    ...a,
    passed_fusion: a.saliency > 0 && a.saliency >= tau,
  }));
}

/**
 * Map the latest responses onto per-sentence display tones. Pure: the same
 * document, target, and annotations always produce the same views.
 *
 * The target gets its own tone; annotated sentences take their role tone
 * when they pass fusion and drop to "candidate" (labeled but below the
 * gate) when they do not; everything else stays plain.
 */
export function sentenceViews(
  text: string,
  sentences: SentenceSpan[],
  target: number | null,
  annotations: Annotation[],
): SentenceView[] {
  const byIndex = new Map(annotations.map((a) => [a.index, a]));
  return sentences.map((s) => {
    let tone: Tone = "plain";
    if (s.index === target) {
      tone = "target";
    } else {
      const annotation = byIndex.get(s.index);
      if (annotation) {
        tone = annotation.passed_fusion ? annotation.role : "candidate";
      }
    }
    return { index: s.index, text: text.slice(s.char_start, s.char_end), tone };
  });
}

export interface Sequencer {
  next(): number;
  isCurrent(seq: number): boolean;
}

/**
 * Monotonic request sequencing: a response is honored only if no newer
 * request was issued after it. Lets a click during an in-flight analysis
 * cancel the older one's effect on the view.
 */
export function createSequencer(): Sequencer {
  let issued = 0;
  return {
    next() {
      issued += 1;
      return issued;
    },
    isCurrent(seq: number) {
      return seq === issued;
    },
  };
}
