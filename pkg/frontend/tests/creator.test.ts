import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { CreatorState, renderCreator } from "../src/creator.js";
import { FakeFetch } from "./helpers.js";
import draftFresh from "./fixtures/draft_fresh.json";
import rejectedSample from "./fixtures/sample_rejected.json";

const FIELDS = ["premise", "hypothesis"];
const LABELS = ["entailment", "contradiction"];

function setup(fake: FakeFetch) {
  const api = new ApiClient("", fake.fn());
  const state = new CreatorState(api, FIELDS, LABELS);
  const root = document.createElement("section");
  document.body.append(root);
  const rerender = () => renderCreator(document, root, state, rerender);
  rerender();
  return { state, root, rerender };
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("creator editor", () => {
  it("disables checking and submitting while the form is empty", () => {
    const { root } = setup(new FakeFetch());
    expect((root.querySelector("#save-btn") as HTMLButtonElement).disabled).toBe(true);
    expect((root.querySelector("#submit-btn") as HTMLButtonElement).disabled).toBe(true);
  });

  it("saves a complete draft and renders one swatch per component", async () => {
    const fake = new FakeFetch();
    fake.on("POST", "/api/drafts", 200, draftFresh);
    const { state, root, rerender } = setup(fake);
    state.fields.premise = "a violinist tunes her strings";
    state.fields.hypothesis = "an artist prepares an instrument";
    await state.save();
    rerender();
    expect(state.phase).toBe("scored");
    const swatches = root.querySelectorAll("#swatches .swatch");
    expect(swatches.length).toBe(
      Object.keys(draftFresh.report.components).length,
    );
    expect((root.querySelector("#submit-btn") as HTMLButtonElement).disabled).toBe(false);
  });

  it("keeps all four creator actions reachable after one save", async () => {
    const fake = new FakeFetch();
    fake.on("POST", "/api/drafts", 200, draftFresh);
    const { state, root, rerender } = setup(fake);
    state.fields.premise = "p text";
    state.fields.hypothesis = "h text";
    await state.save(); // interaction 1: check quality
    rerender();
    // interaction 2 candidates, all present and enabled
    const revise = root.querySelector("#revise-btn") as HTMLButtonElement;
    const discard = root.querySelector("#discard-btn") as HTMLButtonElement;
    const submit = root.querySelector("#submit-btn") as HTMLButtonElement;
    const fixChips = root.querySelectorAll("#swatches .rec-chip");
    expect(revise.disabled).toBe(false);
    expect(discard.disabled).toBe(false);
    expect(submit.disabled).toBe(false);
    expect(fixChips.length).toBeGreaterThan(0);
  });

  it("revise returns to editing and keeps the text", async () => {
    const fake = new FakeFetch();
    fake.on("POST", "/api/drafts", 200, draftFresh);
    const { state } = setup(fake);
    state.fields.premise = "stay put";
    state.fields.hypothesis = "also here";
    await state.save();
    state.revise();
    expect(state.phase).toBe("editing");
    expect(state.fields.premise).toBe("stay put");
  });

  it("fix highlights the offending feature in the editor", async () => {
    const fake = new FakeFetch();
    fake.on("POST", "/api/drafts", 200, draftFresh);
    const { state } = setup(fake);
    state.fields.premise = "p";
    state.fields.hypothesis = "h";
    await state.save();
    state.fix("token 'blicket' strongly signals label 'contradiction' (pmi 2.00)");
    expect(state.phase).toBe("editing");
    expect(state.highlight).toBe("blicket");
  });

  it("discard clears the editor and tells the service", async () => {
    const fake = new FakeFetch();
    fake.on("POST", "/api/drafts", 200, draftFresh);
    fake.on("POST", `/api/drafts/${draftFresh.draft_id}/discard`, 204, undefined);
    const { state } = setup(fake);
    state.fields.premise = "p";
    state.fields.hypothesis = "h";
    await state.save();
    await state.discard();
    expect(state.phase).toBe("editing");
    expect(state.fields.premise).toBe("");
    expect(fake.calls.at(-1)?.url).toContain("/discard");
  });

  it("submit flows to submitted, and a rejection shows feedback verbatim", async () => {
    const fake = new FakeFetch();
    fake.on("POST", "/api/drafts", 200, draftFresh);
    fake.on("POST", `/api/drafts/${draftFresh.draft_id}/submit`, 200,
            { sample_id: rejectedSample.sample_id });
    fake.on("GET", `/api/samples/${rejectedSample.sample_id}`, 200, rejectedSample);
    const { state, root, rerender } = setup(fake);
    state.fields.premise = "p";
    state.fields.hypothesis = "h";
    await state.save();
    await state.submit();
    expect(state.phase).toBe("submitted");
    await state.pollDecision();
    rerender();
    expect(state.phase).toBe("decided");
    const shown = root.querySelector("#decision-feedback")?.textContent;
    expect(shown).toBe(rejectedSample.decision.feedback);
  });
});
