/**
 * Maturity gauge. Renders only numbers the server reported; with no
 * snapshot yet it shows an empty state and no level values at all.
 * Every rendered level value carries data-level-value so integration
 * tests can cross-check the DOM against the API call log.
 */

import { escapeHtml } from './dom.js';
import type { LevelRow, LevelSnapshot } from './types.js';

function levelName(levels: LevelRow[], number: number): string {
  const row = levels.find((lvl) => lvl.number === number);
  return row ? row.name : `level ${number}`;
}

export function renderGauge(
  root: HTMLElement,
  levels: LevelRow[],
  snapshot: LevelSnapshot | null,
): void {
  if (!snapshot) {
    root.innerHTML = '<div class="gauge gauge-empty">Not yet assessed</div>';
    return;
  }

  const ladder = [...levels]
    .sort((a, b) => b.number - a.number)
    .map((lvl) => {
      const reached = lvl.number <= snapshot.strict_level ? ' reached' : '';
      return `<li class="ladder-step${reached}" data-level-number="${lvl.number}">
        <span class="ladder-number">${lvl.number}</span>
        <span class="ladder-name">${escapeHtml(lvl.name)}</span>
      </li>`;
    })
    .join('\n      ');

  root.innerHTML = `<div class="gauge">
    <div class="gauge-current">
      <span class="gauge-number" data-level-value="${snapshot.strict_level}">${snapshot.strict_level}</span>
      <span class="gauge-name">${escapeHtml(levelName(levels, snapshot.strict_level))}</span>
    </div>
    <div class="gauge-optimistic">
      If every open question resolves well:
      <span data-level-value="${snapshot.optimistic_level}">${snapshot.optimistic_level}</span>
      ${escapeHtml(levelName(levels, snapshot.optimistic_level))}
    </div>
    <ol class="gauge-ladder">
      ${ladder}
    </ol>
  </div>`;
}
