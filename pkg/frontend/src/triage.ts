import { ApiError, ReviewApi } from "./api.js";
import type {
  AgreementReport,
  JudgmentBody,
  Label,
  PairPayload,
  Progress,
  Verdict,
} from "./types.js";
import { LABEL_TAXONOMY } from "./types.js";

export interface Draft {
  verdict: Verdict | null;
  labels: Set<Label>;
  note: string;
  coherent: boolean | null;
  complete: boolean | null;
}

/** What the controller needs from a rendering surface. The DOM implementation
 * lives in app.ts; tests drive the controller with a recording fake. */
export interface TriageView {
  showPair(pair: PairPayload, draft: Draft): void;
  showDone(progress: Progress): void;
  showAgreement(report: AgreementReport): void;
  showAgreementPending(detail: string): void;
  showError(message: string): void;
  clearError(): void;
  showOffline(queuedCount: number): void;
  showOnline(): void;
}

function emptyDraft(): Draft {
  return { verdict: null, labels: new Set(), note: "", coherent: null, complete: null };
}

/** Drives one rater through the session order: fetch next, collect a verdict
 * (keyboard or UI), submit, advance. Network failures queue the judgment
 * locally; `flush()` replays the queue and resumes. */
export class TriageController {
  private pair: PairPayload | null = null;
  private draft: Draft = emptyDraft();
  private queue: JudgmentBody[] = [];
  private submitting = false;

  constructor(
    private readonly api: ReviewApi,
    private readonly sessionId: string,
    private readonly rater: string,
    private readonly view: TriageView,
  ) {}

  get currentPair(): PairPayload | null {
    return this.pair;
  }

  get queuedCount(): number {
    return this.queue.length;
  }

  async start(): Promise<void> {
    try {
      const next = await this.api.next(this.sessionId, this.rater);
      if (next.done) {
        this.pair = null;
        this.view.showDone(next.progress);
        await this.showAgreementIfAvailable();
        return;
      }
      this.pair = next;
      this.draft = emptyDraft();
      this.view.showPair(next, this.draft);
    } catch (error) {
      this.handleFailure(error);
    }
  }

  private async showAgreementIfAvailable(): Promise<void> {
    try {
      this.view.showAgreement(await this.api.agreement(this.sessionId));
    } catch (error) {
      if (error instanceof ApiError) {
        this.view.showAgreementPending(error.detail);
      } else {
        this.handleFailure(error);
      }
    }
  }

  setVerdict(verdict: Verdict): void {
    this.draft.verdict = verdict;
    if (verdict !== "Type4Clone") {
      this.draft.labels.clear(); // labels only accompany Type-4 verdicts
    }
    this.render();
  }

  toggleLabel(label: Label): void {
    if (this.draft.verdict !== "Type4Clone") return;
    if (this.draft.labels.has(label)) {
      this.draft.labels.delete(label);
    } else {
      this.draft.labels.add(label);
    }
    this.render();
  }

  setNote(note: string): void {
    this.draft.note = note;
  }

  cycleCoherent(): void {
    this.draft.coherent = this.draft.coherent === null ? false : this.draft.coherent ? null : true;
    this.render();
  }

  cycleComplete(): void {
    this.draft.complete = this.draft.complete === null ? false : this.draft.complete ? null : true;
    this.render();
  }

  /** Keyboard protocol: 4/3/0 pick the verdict, 1-7 toggle taxonomy labels,
   * c/x cycle the coherence/completeness flags, Enter submits, r retries. */
  async handleKey(key: string): Promise<void> {
    switch (key) {
      case "4":
        this.setVerdict("Type4Clone");
        return;
      case "3":
        this.setVerdict("Type3Clone");
        return;
      case "0":
      case "n":
        this.setVerdict("NonClone");
        return;
      case "c":
        this.cycleCoherent();
        return;
      case "x":
        this.cycleComplete();
        return;
      case "r":
        await this.flush();
        return;
      case "Enter":
        await this.submit();
        return;
      default: {
        const index = "1234567".indexOf(key);
        if (key !== "4" && key !== "3" && index >= 0) {
          this.toggleLabel(LABEL_TAXONOMY[index]);
        }
      }
    }
  }

  async submit(): Promise<void> {
    if (!this.pair || this.submitting) return;
    if (!this.draft.verdict) {
      this.view.showError("pick a verdict before submitting");
      return;
    }
    const body: JudgmentBody = {
      pair_id: this.pair.pair_id,
      rater_id: this.rater,
      verdict: this.draft.verdict,
      labels: this.draft.verdict === "Type4Clone" ? [...this.draft.labels].sort() : [],
      note: this.draft.note,
      coherent: this.draft.coherent,
      complete: this.draft.complete,
    };
    this.submitting = true;
    try {
      await this.api.submitJudgment(this.sessionId, body);
      this.view.clearError();
      this.pair = null;
      await this.start();
    } catch (error) {
      if (error instanceof ApiError) {
        // service rejection: show inline, keep the draft for correction
        this.view.showError(error.detail);
      } else {
        // network failure: queue locally, flush when back online
        this.queue.push(body);
        this.pair = null;
        this.view.showOffline(this.queue.length);
      }
    } finally {
      this.submitting = false;
    }
  }

  /** Replay queued judgments in submission order, then resume the walk. */
  async flush(): Promise<void> {
    while (this.queue.length > 0) {
      const body = this.queue[0];
      try {
        await this.api.submitJudgment(this.sessionId, body);
        this.queue.shift();
      } catch (error) {
        if (error instanceof ApiError) {
          this.queue.shift(); // rejected for content: surface and drop
          this.view.showError(error.detail);
        } else {
          this.view.showOffline(this.queue.length);
          return; // still offline
        }
      }
    }
    this.view.showOnline();
    await this.start();
  }

  private render(): void {
    if (this.pair) {
      this.view.showPair(this.pair, this.draft);
    }
  }

  private handleFailure(error: unknown): void {
    if (error instanceof ApiError) {
      this.view.showError(error.detail);
    } else {
      this.view.showOffline(this.queue.length);
    }
  }
}
