import { ApiError, ReviewApi } from "./api.js";
import type { AgreementReport, ConflictEntry, Label, MetricsReport, Verdict } from "./types.js";

export interface ConflictView {
  showConflicts(conflicts: ConflictEntry[]): void;
  showAgreement(report: AgreementReport): void;
  showMetrics(report: MetricsReport): void;
  showMetricsLocked(detail: string): void;
  showError(message: string): void;
}

/** Moderator surface: lists disagreeing pairs with both raters' verdicts and
 * records final calls. Metrics stay locked until the conflict queue is empty;
 * every number shown comes from the service. */
export class ConflictController {
  constructor(
    private readonly api: ReviewApi,
    private readonly sessionId: string,
    private readonly view: ConflictView,
  ) {}

  async load(): Promise<void> {
    try {
      const { conflicts } = await this.api.conflicts(this.sessionId);
      this.view.showConflicts(conflicts);
      this.view.showAgreement(await this.api.agreement(this.sessionId));
      await this.refreshMetrics();
    } catch (error) {
      this.view.showError(error instanceof ApiError ? error.detail : String(error));
    }
  }

  async resolve(pairId: string, verdict: Verdict, labels: Label[] = [], note = ""): Promise<void> {
    try {
      await this.api.resolve(this.sessionId, pairId, verdict, labels, note);
    } catch (error) {
      this.view.showError(error instanceof ApiError ? error.detail : String(error));
      return;
    }
    await this.load(); // refreshes the queue and the metrics panel
  }

  private async refreshMetrics(): Promise<void> {
    try {
      this.view.showMetrics(await this.api.metricsReport(this.sessionId));
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.view.showMetricsLocked(error.detail);
      } else {
        this.view.showError(error instanceof ApiError ? error.detail : String(error));
      }
    }
  }
}
