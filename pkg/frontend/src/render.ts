// Pure view functions: WhatifResponse in, HTML string out. Numeric
// fields are rendered with String(), never rounded or reformatted, so
// the page shows exactly the values the service returned.

import { WhatifResponse } from "./api.js";

export const GAP_GREEN_MAX = 0.05;

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function badgeClass(gap: number): "green" | "amber" {
  return gap <= GAP_GREEN_MAX ? "green" : "amber";
}

export function renderBadge(gap: number): string {
  return `<span class="badge ${badgeClass(gap)}">parity gap ${String(gap)}</span>`;
}

export function renderTotals(resp: WhatifResponse): string {
  const groups = Object.entries(resp.per_group_counts)
    .map(([g, n]) => `${esc(g)}: ${String(n)}`)
    .join(", ");
  return [
    `<dl class="totals">`,
    `<dt>funded</dt><dd data-field="funded">${String(resp.selected.length)}</dd>`,
    `<dt>total utility</dt><dd data-field="total_utility">${String(resp.total_utility)}</dd>`,
    `<dt>total cost</dt><dd data-field="total_cost">${String(resp.total_cost)}</dd>`,
    `<dt>per group</dt><dd data-field="per_group">${groups}</dd>`,
    `<dt>solver</dt><dd data-field="solver">${esc(resp.solver)}</dd>`,
    `</dl>`,
  ].join("");
}

export function renderTable(resp: WhatifResponse, limit = 50): string {
  const rows = resp.ranking
    .slice(0, limit)
    .map(
      (r) =>
        `<tr class="${r.selected ? "funded" : "unfunded"}">` +
        `<td>${esc(r.record_id)}</td>` +
        `<td>${esc(r.district)}</td>` +
        `<td>${esc(r.group)}</td>` +
        `<td>${String(r.score)}</td>` +
        `<td>${String(r.cost)}</td>` +
        `<td>${r.selected ? "yes" : ""}</td>` +
        `</tr>`,
    )
    .join("");
  return (
    `<table><thead><tr>` +
    `<th>record</th><th>district</th><th>group</th>` +
    `<th>score</th><th>cost</th><th>funded</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderResult(resp: WhatifResponse): string {
  return renderBadge(resp.parity_gap) + renderTotals(resp) + renderTable(resp);
}

export function renderError(message: string): string {
  return `<p class="error">${esc(message)}</p>`;
}
