// DOM bootstrap: binds the controllers to the page. Rater identity and
// session come from the query string: /?session=<id>&rater=<name>.

import { ReviewApi } from "./api.js";
import { ConflictController, ConflictView } from "./conflicts.js";
import { highlight } from "./highlight.js";
import { TriageController, TriageView, Draft } from "./triage.js";
import type {
  AgreementReport,
  ConflictEntry,
  FunctionPayload,
  MetricsReport,
  PairPayload,
  Progress,
} from "./types.js";
import { LABEL_TAXONOMY } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function renderCode(target: HTMLElement, code: string): void {
  target.textContent = "";
  for (const token of highlight(code)) {
    const span = document.createElement("span");
    span.className = `tok-${token.kind}`;
    span.textContent = token.text; // token partition keeps text byte-exact
    target.appendChild(span);
  }
}

function renderFunction(panel: HTMLElement, fn: FunctionPayload, generated: boolean): void {
  const title = panel.querySelector(".fn-title") as HTMLElement;
  const comment = panel.querySelector(".fn-comment") as HTMLElement;
  const code = panel.querySelector(".fn-code") as HTMLElement;
  title.textContent = `${fn.contract_name ?? "?"}.${fn.function_name ?? "?"} (${fn.function_visibility ?? "?"}, ${fn.solidity_version ?? "?"})`;
  comment.textContent = fn.function_comment ?? "(no header comment)";
  comment.classList.toggle("generated", generated);
  renderCode(code, fn.function_code ?? "");
}

class DomTriageView implements TriageView {
  showPair(pair: PairPayload, draft: Draft): void {
    el("triage").hidden = false;
    el("finished").hidden = true;
    const generated = pair.cm_s !== null && !pair.functions.a.function_comment;
    renderFunction(el("fn-a"), pair.functions.a, generated);
    renderFunction(el("fn-b"), pair.functions.b, generated);
    el("badge-cd").textContent = `cd_s ${String(pair.cd_s)}`;
    el("badge-cm").textContent = pair.cm_s === null ? "cm_s –" : `cm_s ${String(pair.cm_s)}`;
    el("badge-stripe").textContent = pair.stripe ?? "unstriped";
    el("badge-set").textContent = pair.set;
    el("badge-name").textContent = pair.same_name ? "same name" : "different names";
    const judged = Object.values(pair.progress.judged).reduce((a, b) => a + b, 0);
    el("progress").textContent = `${judged}/${pair.progress.expected_judgments} judgments`;

    for (const [i, label] of LABEL_TAXONOMY.entries()) {
      const box = el<HTMLInputElement>(`label-${i + 1}`);
      box.checked = draft.labels.has(label);
      box.disabled = draft.verdict !== "Type4Clone";
    }
    el("labels").hidden = draft.verdict !== "Type4Clone";
    for (const verdict of ["Type4Clone", "Type3Clone", "NonClone"]) {
      el(`verdict-${verdict}`).classList.toggle("selected", draft.verdict === verdict);
    }
    el("flag-coherent").textContent = `coherent: ${draft.coherent ?? "–"}`;
    el("flag-complete").textContent = `complete: ${draft.complete ?? "–"}`;
  }

  showDone(progress: Progress): void {
    el("triage").hidden = true;
    el("finished").hidden = false;
    el("finished-progress").textContent = `all ${progress.pairs} pairs judged`;
  }

  showAgreement(report: AgreementReport): void {
    el("agreement").hidden = false;
    el("kappa").textContent = String(report.kappa);
    el("agreement-detail").textContent =
      `p_o ${String(report.observed_agreement)}, p_e ${String(report.expected_agreement)}, ` +
      `${report.conflicts.length} open conflicts over ${report.n_pairs} pairs`;
  }

  showAgreementPending(detail: string): void {
    el("agreement").hidden = false;
    el("kappa").textContent = "–";
    el("agreement-detail").textContent = detail;
  }

  showError(message: string): void {
    const banner = el("error");
    banner.hidden = false;
    banner.textContent = message;
  }

  clearError(): void {
    el("error").hidden = true;
  }

  showOffline(queuedCount: number): void {
    const banner = el("offline");
    banner.hidden = false;
    banner.textContent = `offline: ${queuedCount} judgment(s) queued — press r to retry`;
  }

  showOnline(): void {
    el("offline").hidden = true;
  }
}

class DomConflictView implements ConflictView {
  constructor(private readonly onResolve: (pairId: string, verdict: string) => void) {}

  showConflicts(conflicts: ConflictEntry[]): void {
    const list = el("conflict-list");
    list.textContent = "";
    for (const conflict of conflicts) {
      const row = document.createElement("li");
      const verdicts = Object.entries(conflict.verdicts)
        .map(([rater, verdict]) => `${rater}: ${verdict}`)
        .join(" | ");
      row.textContent = `${conflict.pair_id} — ${verdicts} `;
      for (const verdict of ["Type4Clone", "Type3Clone", "NonClone"]) {
        const button = document.createElement("button");
        button.textContent = `final: ${verdict}`;
        button.addEventListener("click", () => this.onResolve(conflict.pair_id, verdict));
        row.appendChild(button);
      }
      list.appendChild(row);
    }
    el("conflict-empty").hidden = conflicts.length > 0;
  }

  showAgreement(report: AgreementReport): void {
    el("kappa").textContent = String(report.kappa);
    el("agreement").hidden = false;
  }

  showMetrics(report: MetricsReport): void {
    el("metrics").hidden = false;
    el("metrics-locked").hidden = true;
    el("metrics-body").textContent = JSON.stringify(report, null, 2);
  }

  showMetricsLocked(detail: string): void {
    el("metrics").hidden = false;
    el("metrics-locked").hidden = false;
    el("metrics-body").textContent = detail;
  }

  showError(message: string): void {
    const banner = el("error");
    banner.hidden = false;
    banner.textContent = message;
  }
}

export function boot(): void {
  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get("session") ?? "";
  const rater = params.get("rater") ?? "";
  if (!sessionId || !rater) {
    document.body.textContent = "open as /?session=<id>&rater=<name>";
    return;
  }
  const api = new ReviewApi("");
  const triage = new TriageController(api, sessionId, rater, new DomTriageView());
  const conflictController = new ConflictController(
    api,
    sessionId,
    new DomConflictView((pairId, verdict) =>
      void conflictController.resolve(pairId, verdict as never),
    ),
  );

  document.addEventListener("keydown", (event) => {
    if ((event.target as HTMLElement | null)?.tagName === "TEXTAREA") return;
    void triage.handleKey(event.key);
  });
  el<HTMLTextAreaElement>("note").addEventListener("input", (event) => {
    triage.setNote((event.target as HTMLTextAreaElement).value);
  });
  el("submit").addEventListener("click", () => void triage.submit());
  el("show-conflicts").addEventListener("click", () => void conflictController.load());
  for (const [i, label] of LABEL_TAXONOMY.entries()) {
    el<HTMLInputElement>(`label-${i + 1}`).addEventListener("change", () =>
      triage.toggleLabel(label),
    );
  }
  for (const verdict of ["Type4Clone", "Type3Clone", "NonClone"] as const) {
    el(`verdict-${verdict}`).addEventListener("click", () => triage.setVerdict(verdict));
  }
  window.addEventListener("online", () => void triage.flush());

  void triage.start();
}

if (typeof document !== "undefined" && document.getElementById("triage")) {
  boot();
}
