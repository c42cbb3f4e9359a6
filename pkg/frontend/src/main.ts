// DOM wiring. Everything stateful lives in WhatifController; this file
// only copies control values into it and swaps rendered HTML in.

import { WhatifRequest } from "./api.js";
import { renderError, renderResult } from "./render.js";
import { WhatifController } from "./state.js";

const base = (window as unknown as { FOODRISK_API?: string }).FOODRISK_API ?? "";

const budget = document.getElementById("budget") as HTMLInputElement;
const budgetValue = document.getElementById("budget-value") as HTMLElement;
const floorRural = document.getElementById("floor-rural") as HTMLInputElement;
const floorUrban = document.getElementById("floor-urban") as HTMLInputElement;
const results = document.getElementById("results") as HTMLElement;
const status = document.getElementById("status") as HTMLElement;

const controller = new WhatifController(base, {
  onPending: () => {
    status.textContent = "…";
  },
  onResult: (resp) => {
    status.textContent = "";
    results.innerHTML = renderResult(resp);
  },
  onError: (message) => {
    status.textContent = "";
    results.innerHTML = renderError(message);
  },
});

function floors(): Record<string, number> | undefined {
  const out: Record<string, number> = {};
  if (floorRural.value !== "" && Number(floorRural.value) > 0) {
    out.rural = Number(floorRural.value);
  }
  if (floorUrban.value !== "" && Number(floorUrban.value) > 0) {
    out.urban = Number(floorUrban.value);
  }
  return Object.keys(out).length ? out : undefined;
}

function snapshot(): Partial<WhatifRequest> {
  budgetValue.textContent = budget.value;
  return { budget: Number(budget.value), floors: floors() };
}

budget.addEventListener("input", () => controller.update(snapshot()));
floorRural.addEventListener("input", () => controller.update(snapshot()));
floorUrban.addEventListener("input", () => controller.update(snapshot()));

controller.update(snapshot());
