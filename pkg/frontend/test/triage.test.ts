// Scripted two-rater session over a 10-pair fixture against the stubbed
// service: 20 stored judgments, engineered conflicts surfaced, and after
// resolution the displayed kappa/metrics equal the service JSON verbatim.

import { describe, expect, it } from "vitest";

import { ReviewApi } from "../src/api.js";
import { ConflictController } from "../src/conflicts.js";
import { TriageController } from "../src/triage.js";
import { FakeConflictView, FakeTriageView } from "./fakes.js";
import { StubService, makePairs } from "./stub_service.js";

const SESSION = "fixture-session";

function setup(pairCount = 10) {
  const stub = new StubService(SESSION, ["rater-a", "rater-b"], makePairs(pairCount));
  const api = new ReviewApi("", stub.fetch);
  return { stub, api };
}

/** Keyboard-only pass: drive one rater through every pair using key events. */
async function keyboardPass(
  api: ReviewApi,
  rater: string,
  verdictKeyFor: (pairId: string) => string,
): Promise<FakeTriageView> {
  const view = new FakeTriageView();
  const controller = new TriageController(api, SESSION, rater, view);
  await controller.start();
  while (controller.currentPair) {
    const pair = controller.currentPair;
    const key = verdictKeyFor(pair.pair_id);
    await controller.handleKey(key);
    if (key === "4") {
      await controller.handleKey("5"); // toggle diff_algo
    }
    await controller.handleKey("Enter");
  }
  return view;
}

describe("scripted two-rater session (10-pair fixture)", () => {
  it("stores 20 judgments, surfaces conflicts, then shows service-identical reports", async () => {
    const { stub, api } = setup(10);

    // rater-a: Type-4 everywhere; rater-b flips two pairs -> two conflicts
    const flipped = new Set([stub.order[2], stub.order[6]]);
    const viewA = await keyboardPass(api, "rater-a", () => "4");
    const viewB = await keyboardPass(api, "rater-b", (pairId) =>
      flipped.has(pairId) ? "n" : "4",
    );

    expect(stub.judgmentCount).toBe(20);
    expect(viewA.doneProgress?.pairs).toBe(10);
    expect(viewB.doneProgress?.pairs).toBe(10);

    // the finished screen shows the service's agreement JSON untouched
    expect(viewB.agreement).toEqual(stub.agreementJson());
    expect(viewB.agreement?.conflicts.length).toBe(2);

    // moderator view: conflicts listed with both verdicts, metrics locked
    const conflictView = new FakeConflictView();
    const moderator = new ConflictController(api, SESSION, conflictView);
    await moderator.load();
    expect(conflictView.conflicts.at(-1)?.map((c) => c.pair_id)).toEqual([...flipped].sort());
    expect(conflictView.conflicts.at(-1)?.[0].verdicts).toEqual({
      "rater-a": "Type4Clone",
      "rater-b": "NonClone",
    });
    expect(conflictView.lockedDetail).toContain("unresolved conflicts");
    expect(conflictView.metrics).toBeNull();

    // resolve both conflicts; the queue empties and metrics unlock
    for (const pairId of [...flipped].sort()) {
      await moderator.resolve(pairId, "NonClone");
    }
    expect(conflictView.conflicts.at(-1)).toEqual([]);
    expect(conflictView.metrics).toEqual(stub.metricsJson());
    expect(conflictView.agreement).toEqual(stub.agreementJson());

    // no client-side math: the displayed reports are the exact service JSON
    const raw = await (await stub.fetch(`/sessions/${SESSION}/reports/metrics`)).json();
    expect(conflictView.metrics).toEqual(raw);
  });

  it("keyboard-only pass produces one judgment per pair", async () => {
    const { stub, api } = setup(10);
    await keyboardPass(api, "rater-a", () => "4");
    expect(stub.judgmentCount).toBe(10);
    const raterAKeys = [...stub.judgments.keys()].filter((k) => k.endsWith("|rater-a"));
    expect(raterAKeys.length).toBe(10);
  });
});

describe("verdict and label rules", () => {
  it("non-clone verdicts submit with empty labels", async () => {
    const { stub, api } = setup(4);
    const view = new FakeTriageView();
    const controller = new TriageController(api, SESSION, "rater-a", view);
    await controller.start();
    await controller.handleKey("4");
    await controller.handleKey("1"); // modifier while Type-4: allowed
    await controller.handleKey("n"); // switching to non-clone clears labels
    await controller.handleKey("Enter");
    const stored = stub.judgments.get(`${stub.order[0]}|rater-a`);
    expect(stored?.verdict).toBe("NonClone");
    expect(stored?.labels).toEqual([]);
  });

  it("labels cannot be toggled without a Type-4 verdict", async () => {
    const { api } = setup(2);
    const controller = new TriageController(api, SESSION, "rater-a", new FakeTriageView());
    await controller.start();
    await controller.handleKey("1");
    await controller.handleKey("4");
    const draft = (controller as unknown as { draft: { labels: Set<string> } }).draft;
    expect(draft.labels.size).toBe(0);
  });

  it("submit without a verdict shows an inline error", async () => {
    const { stub, api } = setup(2);
    const view = new FakeTriageView();
    const controller = new TriageController(api, SESSION, "rater-a", view);
    await controller.start();
    await controller.handleKey("Enter");
    expect(view.errors.at(-1)).toContain("verdict");
    expect(stub.judgmentCount).toBe(0);
  });

  it("service rejection is shown inline and the pair is retained for retry", async () => {
    const { stub, api } = setup(2);
    const view = new FakeTriageView();
    const controller = new TriageController(api, SESSION, "rater-a", view);
    await controller.start();
    await controller.handleKey("n");
    stub.rejectNextJudgment = "session is closed for new judgments";
    await controller.handleKey("Enter");
    expect(view.errors.at(-1)).toBe("session is closed for new judgments");
    expect(controller.currentPair?.pair_id).toBe(stub.order[0]); // still on the pair
    // retry after the service recovers succeeds
    await controller.handleKey("Enter");
    expect(stub.judgmentCount).toBe(1);
  });
});

describe("pair payload rendering contract", () => {
  it("the view receives the service payload untouched", async () => {
    const functions = {
      "f0:A#fn0#0": {
        function_id: "f0:A#fn0#0",
        function_code: "function fn0() public {  return   1; }",
        function_comment: "raw   comment  spacing",
      },
      "g0:B#fn0#0": { function_id: "g0:B#fn0#0", function_code: "function fn0() external {}" },
    };
    const stub = new StubService(SESSION, ["rater-a", "rater-b"], makePairs(1), functions);
    const api = new ReviewApi("", stub.fetch);
    const view = new FakeTriageView();
    await new TriageController(api, SESSION, "rater-a", view).start();
    const shown = view.pairsShown[0];
    // no client-side normalization of code or comments
    expect(shown.functions.a.function_code).toBe("function fn0() public {  return   1; }");
    expect(shown.functions.a.function_comment).toBe("raw   comment  spacing");
    expect(shown.cd_s).toBe(0.7);
    expect(shown.stripe).toBe("cm(0.85,0.90]:cd(0.60,0.80]");
  });
});
