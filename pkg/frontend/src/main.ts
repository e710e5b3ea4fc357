/**
 * Browser entry point: binds the session to the service URL, renders the
 * scope grid, the rating/weight forms, and the dashboard into the page, and
 * wires conflict prompts. All state flows through the models in the sibling
 * modules; this file only touches the DOM.
 */

import { ApiClient, ApiError } from "./api.js";
import { DashboardModel } from "./dashboard.js";
import { radarSvg } from "./radar.js";
import { RatingFormModel, RATING_SCALE } from "./ratingForm.js";
import { buildScopeGrid, type ScopeGridView } from "./scopeGrid.js";
import { UiSession } from "./session.js";
import type { Level } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function renderGrid(view: ScopeGridView): string {
  const header =
    "<tr><th>Level</th>" +
    view.rows[0]!.cells.map((c) => `<th>${c.viewpoint}</th>`).join("") +
    "</tr>";
  const body = view.rows
    .map((row) => {
      const cells = row.cells
        .map((cell) => {
          const classes = [
            "cell",
            cell.greyed ? "greyed" : "",
            cell.populated ? "populated" : "",
            cell.error ? "invalid" : "",
          ]
            .filter(Boolean)
            .join(" ");
          const roles = cell.roles.map(escapeHtml).join(", ");
          const indicators = cell.indicators
            .map((i) => `${escapeHtml(i.id)} (${i.kind[0]})`)
            .join(", ");
          const warnings = cell.warnings
            .map((w) => `<div class="warning">${escapeHtml(w)}</div>`)
            .join("");
          const error = cell.error
            ? `<div class="error">${escapeHtml(cell.error)}</div>`
            : "";
          return `<td class="${classes}" data-level="${cell.level}" data-viewpoint="${cell.viewpoint}">
            <div class="roles">${roles}</div><div class="indicators">${indicators}</div>${warnings}${error}</td>`;
        })
        .join("");
      return `<tr class="${row.greyed ? "greyed" : ""}"><th>${row.level}</th>${cells}</tr>`;
    })
    .join("");
  return `<table class="scope-grid">${header}${body}</table>`;
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const serviceUrl = params.get("service") ?? "http://127.0.0.1:8421";
  const api = new ApiClient(serviceUrl);
  const session = new UiSession(api, serviceUrl, params.get("as_of") ?? undefined);
  await session.connect();
  el("revision").textContent = `revision ${session.lastSeenRevision}`;
  el("as-of").textContent = `as of ${session.asOf}`;

  const [scope, coverage] = await Promise.all([api.getScope(), api.getScopeCoverage()]);
  el("scope").innerHTML = renderGrid(buildScopeGrid(scope, coverage));

  const dashboard = new DashboardModel(api, session);
  const level = (params.get("level") ?? "Process") as Level;
  const entity = params.get("entity") ?? "";
  if (entity) {
    try {
      const radar = await dashboard.loadViewpointRadar(level, entity);
      el("viewpoint-radar").innerHTML = radarSvg(radar);
    } catch (error) {
      if (!(error instanceof ApiError)) throw error;
      el("viewpoint-radar").textContent = error.message;
    }
    try {
      const flags = await dashboard.loadDivergence(level, entity);
      el("divergence").innerHTML = flags.length
        ? flags
            .map(
              (flag) =>
                `<li>${escapeHtml(flag.description)} ${flag.evaluationLinks
                  .map((l) => `<a href="${l.href}">${l.id}</a>`)
                  .join(" ")}</li>`,
            )
            .join("")
        : "<li>no divergence flags</li>";
    } catch (error) {
      if (!(error instanceof ApiError)) throw error;
      el("divergence").innerHTML = `<li>${escapeHtml(error.message)}</li>`;
    }
  }
  try {
    const aggregated = await dashboard.loadAggregatedRadar();
    el("aggregated-radar").innerHTML = radarSvg(aggregated);
  } catch (error) {
    if (!(error instanceof ApiError)) throw error;
    el("aggregated-radar").textContent = error.message;
  }

  const form = new RatingFormModel(api, session, "Implementer", level, entity);
  await form.loadGuidelines().catch(() => undefined);
  el("guidelines").textContent = form.guidelines || "(no rating guidelines recorded)";
  el("rating-scale").innerHTML = RATING_SCALE.map(
    (value) => `<option value="${value}">${value > 0 ? "+" : ""}${value}</option>`,
  ).join("");

  window.addEventListener("spieval:conflict", () => {
    const prompt = session.conflictPrompt;
    if (!prompt) return;
    el("conflict").textContent = prompt.message;
  });
}

boot().catch((error) => {
  document.body.insertAdjacentHTML(
    "beforeend",
    `<pre class="boot-error">${escapeHtml(String(error))}</pre>`,
  );
});
