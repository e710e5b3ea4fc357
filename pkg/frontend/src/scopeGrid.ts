/**
 * View-model for the measurement-level × evaluation-viewpoint scope grid.
 *
 * Always a 5×3 grid; rows for unscoped levels render greyed. Cell edits are
 * turned into a full scope document for the service to validate (the client
 * mirrors no validation rules beyond basic shape); service-side validation
 * errors attach to the offending cell.
 */

import type {
  CellIndicatorPayload,
  CoverageReport,
  Level,
  ScopeCellPayload,
  ScopeDoc,
  Viewpoint,
} from "./types.js";
import { LEVELS, VIEWPOINTS } from "./types.js";

export interface GridCell {
  level: Level;
  viewpoint: Viewpoint;
  greyed: boolean;
  populated: boolean;
  roles: string[];
  indicators: CellIndicatorPayload[];
  warnings: string[];
  error: string | null;
}

export interface GridRow {
  level: Level;
  greyed: boolean;
  cells: GridCell[];
}

export interface ScopeGridView {
  rows: GridRow[];
  coverageWarnings: string[];
  holistic: boolean;
}

export function buildScopeGrid(
  scope: ScopeDoc | null,
  coverage: CoverageReport | null,
): ScopeGridView {
  const scopedLevels = new Set<Level>(scope?.levels ?? []);
  const byKey = new Map<string, ScopeCellPayload>();
  for (const cell of scope?.cells ?? []) {
    byKey.set(`${cell.level}/${cell.viewpoint}`, cell);
  }
  const warnings = coverage ? [...coverage.scope_warnings, ...coverage.complementary_violations] : [];

  const rows: GridRow[] = LEVELS.map((level) => {
    const greyed = !scopedLevels.has(level);
    const cells: GridCell[] = VIEWPOINTS.map((viewpoint) => {
      const cell = byKey.get(`${level}/${viewpoint}`);
      const cellWarnings = warnings.filter(
        (w) => w.includes(level) && w.includes(viewpoint),
      );
      return {
        level,
        viewpoint,
        greyed,
        populated: cell !== undefined,
        roles: cell?.roles ?? [],
        indicators: cell?.indicators ?? [],
        warnings: cellWarnings,
        error: null,
      };
    });
    return { level, greyed, cells };
  });

  return {
    rows,
    coverageWarnings: warnings,
    holistic: coverage?.holistic ?? false,
  };
}

/** Apply one cell edit, producing the scope document to PUT back. Clearing
 * both roles and indicators removes the cell. */
export function applyCellEdit(
  scope: ScopeDoc | null,
  level: Level,
  viewpoint: Viewpoint,
  roles: string[],
  indicators: CellIndicatorPayload[],
): ScopeDoc {
  const levels = new Set<Level>(scope?.levels ?? []);
  levels.add(level);
  const cells = (scope?.cells ?? []).filter(
    (cell) => !(cell.level === level && cell.viewpoint === viewpoint),
  );
  if (roles.length > 0 || indicators.length > 0) {
    cells.push({ level, viewpoint, roles, indicators });
  }
  const ordered = [...levels].sort((a, b) => LEVELS.indexOf(a) - LEVELS.indexOf(b));
  return { levels: ordered, cells };
}

/** Attach a service validation error to the offending cell (returns a copy). */
export function withCellError(
  view: ScopeGridView,
  level: Level,
  viewpoint: Viewpoint,
  message: string,
): ScopeGridView {
  return {
    ...view,
    rows: view.rows.map((row) =>
      row.level === level
        ? {
            ...row,
            cells: row.cells.map((cell) =>
              cell.viewpoint === viewpoint ? { ...cell, error: message } : cell,
            ),
          }
        : row,
    ),
  };
}
