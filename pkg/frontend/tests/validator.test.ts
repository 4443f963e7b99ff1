import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { makeSparklinePoints, trajectoryValues } from "../src/sparkline.js";
import { renderValidator, ValidatorState } from "../src/validator.js";
import { FakeFetch } from "./helpers.js";
import queueFixture from "./fixtures/queue.json";
import statsFixture from "./fixtures/stats.json";
import missingFeedback from "./fixtures/error_missing_feedback.json";
import draftTerm from "./fixtures/draft_term.json";

function setup(fake: FakeFetch) {
  const api = new ApiClient("", fake.fn());
  const state = new ValidatorState(api, "val-1");
  const root = document.createElement("section");
  document.body.append(root);
  const rerender = () => renderValidator(document, root, state, rerender);
  return { state, root, rerender };
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("validator queue", () => {
  it("rejecting without feedback is blocked client-side: no request issued", async () => {
    const fake = new FakeFetch();
    const { state, root, rerender } = setup(fake);
    state.queue = queueFixture as never;
    state.stats = statsFixture as never;
    const sid = queueFixture[0].sample_id;
    const sent = await state.reject(sid);
    rerender();
    expect(sent).toBe(false);
    expect(fake.calls.length).toBe(0); // nothing left the client
    expect(state.feedbackRequired[sid]).toBe(true);
    expect(root.querySelector(".feedback-warning")).not.toBeNull();
  });

  it("a 422 from the service reopens the feedback field", async () => {
    const fake = new FakeFetch();
    const sid = queueFixture[0].sample_id;
    fake.on("POST", `/api/samples/${sid}/decision`,
            missingFeedback.status, missingFeedback.body);
    const { state } = setup(fake);
    state.queue = queueFixture as never;
    state.feedback[sid] = "   "; // passes the client's own check? no: trimmed empty
    expect(await state.reject(sid)).toBe(false);
    expect(fake.calls.length).toBe(0);
    state.feedback[sid] = "x"; // now the service itself answers 422
    expect(await state.reject(sid)).toBe(false);
    expect(state.feedbackRequired[sid])
      .toBe(true);
  });

  it("reject with feedback is sent and removes the item", async () => {
    const fake = new FakeFetch();
    const sid = queueFixture[0].sample_id;
    fake.on("POST", `/api/samples/${sid}/decision`, 200, { status: "rejected" });
    fake.on("GET", "/api/dataset/stats", 200, statsFixture);
    const { state } = setup(fake);
    state.queue = [...(queueFixture as never[])] as never;
    state.feedback[sid] = "too close to an existing sample";
    expect(await state.reject(sid)).toBe(true);
    expect(state.queue.find((q) => q.sample_id === sid)).toBeUndefined();
    expect(fake.calls[0].body).toMatchObject({
      verdict: "reject",
      feedback: "too close to an existing sample",
    });
  });

  it("accept is one click: item leaves the queue and the sparkline grows", async () => {
    const fake = new FakeFetch();
    const sid = queueFixture[0].sample_id;
    const grownStats = {
      ...statsFixture,
      size: statsFixture.size + 1,
      trajectory: [...statsFixture.trajectory, statsFixture.trajectory[0]],
    };
    fake.on("POST", `/api/samples/${sid}/decision`, 200, { status: "accepted" });
    fake.on("GET", "/api/dataset/stats", 200, grownStats);
    const { state, root, rerender } = setup(fake);
    state.queue = [...(queueFixture as never[])] as never;
    state.stats = statsFixture as never;
    rerender();
    const before = Number(
      root.querySelector("#stats-sparkline polyline")?.getAttribute("data-points"),
    );
    await state.accept(sid);
    rerender();
    const after = Number(
      root.querySelector("#stats-sparkline polyline")?.getAttribute("data-points"),
    );
    expect(state.queue.find((q) => q.sample_id === sid)).toBeUndefined();
    expect(after).toBe(before + 1);
    expect(fake.calls[0].body).toMatchObject({ verdict: "accept" });
  });

  it("granularity toggle refetches the queue with ?granularity=term", async () => {
    const fake = new FakeFetch();
    fake.on("GET", "/api/queue?granularity=term", 200,
            [{ sample: draftTerm.sample, sample_id: "s-00003",
               report: draftTerm.report }]);
    const { state, root, rerender } = setup(fake);
    state.queue = queueFixture as never;
    state.stats = statsFixture as never;
    await state.toggleGranularity();
    rerender();
    expect(fake.calls[0].url).toBe("/api/queue?granularity=term");
    expect(state.granularity).toBe("term");
    expect(root.querySelectorAll(".term-bars li").length).toBeGreaterThan(0);
  });

  it("renders every queue item with its reported swatch colors", () => {
    const { state, root, rerender } = setup(new FakeFetch());
    state.queue = queueFixture as never;
    state.stats = statsFixture as never;
    rerender();
    const cards = root.querySelectorAll(".queue-item");
    expect(cards.length).toBe(queueFixture.length);
    queueFixture.forEach((item, i) => {
      for (const [name, comp] of Object.entries(item.report.components)) {
        const el = cards[i].querySelector(`[data-component="${name}"]`) as HTMLElement;
        expect(el.dataset.color).toBe((comp as { color: string }).color);
      }
    });
  });
});

describe("sparkline", () => {
  it("averages defined components per trajectory entry", () => {
    const vals = trajectoryValues([
      { c1: 0.5, c2: null, c3: 1.0 },
      { c1: 0.0, c2: 0.5, c3: null },
    ]);
    expect(vals[0]).toBeCloseTo(0.75, 12);
    expect(vals[1]).toBeCloseTo(0.25, 12);
  });

  it("emits one point per value", () => {
    const points = makeSparklinePoints([0.1, 0.5, 0.9], 120, 28);
    expect(points.split(" ").length).toBe(3);
    expect(makeSparklinePoints([], 120, 28)).toBe("");
  });
});
