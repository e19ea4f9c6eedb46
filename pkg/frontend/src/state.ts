/**
 * Client view state. Nothing here is domain data — it only remembers what
 * the user is looking at and which revision the displayed numbers came from;
 * a page reload loses no answers because all state of record lives server-side.
 */

import type { QuestionItem } from "./api.js";

export interface Filters {
  tag: string;
  lamp: string;
  step: string;
}

export class ViewState {
  filters: Filters = { tag: "", lamp: "", step: "" };
  selectedMonitor: string | null = null;
  /** Pending questions in display order (funnel residue first). */
  pendingQueue: QuestionItem[] = [];
  /** Revision the rendered panels correspond to. */
  revision = 0;
  /** Latest revision reported by /health (for the stale indicator). */
  healthRevision = 0;
  /** Residual class representatives, used to prioritize the queue. */
  residualIds = new Set<string>();

  get stale(): boolean {
    return this.healthRevision > this.revision;
  }

  /** Residual-monitor questions first, otherwise stable order. */
  prioritize(questions: QuestionItem[]): QuestionItem[] {
    const residual = questions.filter((q) => this.residualIds.has(q.target));
    const rest = questions.filter((q) => !this.residualIds.has(q.target));
    return [...residual, ...rest];
  }

  applyStepFilter(questions: QuestionItem[]): QuestionItem[] {
    if (!this.filters.step) return questions;
    return questions.filter((q) => q.step === this.filters.step);
  }
}
