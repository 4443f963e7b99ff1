// App entry: role switcher plus a 2-second poll loop that keeps the
// validator queue and the creator's decision status fresh.

import { ApiClient } from "./api.js";
import { CreatorState, renderCreator } from "./creator.js";
import { renderValidator, ValidatorState } from "./validator.js";

const POLL_MS = 2000;

// single-dataset deployment: field names and labels of the served task
const FIELD_NAMES = ["premise", "hypothesis"];
const LABELS = ["entailment", "neutral", "contradiction"];

function start(): void {
  const api = new ApiClient("");
  const creator = new CreatorState(api, FIELD_NAMES, LABELS);
  const validator = new ValidatorState(api, "validator-1");

  const creatorRoot = document.getElementById("creator-root") as HTMLElement;
  const validatorRoot = document.getElementById("validator-root") as HTMLElement;
  const offline = document.getElementById("offline-banner") as HTMLElement;

  const rerenderCreator = () =>
    renderCreator(document, creatorRoot, creator, rerenderCreator);
  const rerenderValidator = () =>
    renderValidator(document, validatorRoot, validator, rerenderValidator);

  document.querySelectorAll<HTMLButtonElement>("[data-role-tab]").forEach((tab) => {
    tab.addEventListener("click", () => {
      const role = tab.dataset.roleTab;
      creatorRoot.hidden = role !== "creator";
      validatorRoot.hidden = role !== "validator";
    });
  });

  rerenderCreator();
  validator.refresh().then(rerenderValidator).catch(() => undefined);

  setInterval(async () => {
    try {
      await creator.pollDecision();
      if (!validatorRoot.hidden) {
        await validator.refresh();
        rerenderValidator();
      }
      if (creator.phase === "decided") rerenderCreator();
      offline.hidden = true;
    } catch {
      offline.hidden = false;
    }
  }, POLL_MS);
}

document.addEventListener("DOMContentLoaded", start);
