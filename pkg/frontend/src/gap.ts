/**
 * Gap and what-if explorer. Missing requirements are listed exactly in
 * the server's order with K/P/S badges; toggling items replays them
 * through the what-if endpoint and shows the stage the server projects.
 * When a call fails the last known projection stays up, flagged stale.
 */

import type { ApiClient } from './api.js';
import { escapeAttr, escapeHtml } from './dom.js';
import type { GapItem, LevelSnapshot, ModelDoc, StatusValue } from './types.js';

export interface GapViewState {
  sessionId: string;
  target: number;
  missing: GapItem[];
  reachable: boolean;
  toggled: Set<string>;
  projected: LevelSnapshot | null;
  stale: boolean;
}

export async function loadGap(
  client: ApiClient,
  sessionId: string,
  target: number,
): Promise<GapViewState> {
  const doc = await client.getGap(sessionId, target);
  return {
    sessionId,
    target: doc.target_level,
    missing: doc.missing,
    reachable: doc.reachable,
    toggled: new Set(),
    projected: null,
    stale: false,
  };
}

/**
 * Flip one requirement in the hypothetical set and ask the server what
 * stage the session would reach. Any failure keeps the previous
 * projection and marks it stale instead of blanking the view.
 */
export async function toggleItem(
  client: ApiClient,
  state: GapViewState,
  requirementId: string,
): Promise<GapViewState> {
  const toggled = new Set(state.toggled);
  if (toggled.has(requirementId)) {
    toggled.delete(requirementId);
  } else {
    toggled.add(requirementId);
  }
  const overrides: Record<string, StatusValue> = {};
  for (const rid of toggled) overrides[rid] = 'satisfied';
  try {
    const doc = await client.whatIf(state.sessionId, overrides);
    return { ...state, toggled, projected: doc.after, stale: false };
  } catch {
    return { ...state, toggled, stale: true };
  }
}

export interface GapHandlers {
  onToggle: (requirementId: string) => void;
  onTarget: (target: number) => void;
}

function categoryOf(model: ModelDoc, requirementId: string): string {
  const req = model.requirements.find((row) => row.id === requirementId);
  return req ? req.category : '?';
}

function levelName(model: ModelDoc, number: number): string {
  const row = model.levels.find((lvl) => lvl.number === number);
  return row ? row.name : `level ${number}`;
}

export function renderGap(
  root: HTMLElement,
  model: ModelDoc,
  state: GapViewState,
  handlers: GapHandlers,
): void {
  const targetOptions = model.levels
    .filter((lvl) => lvl.number >= 1)
    .map(
      (lvl) =>
        `<option value="${lvl.number}"${lvl.number === state.target ? ' selected' : ''}>${lvl.number} ${escapeHtml(lvl.name)}</option>`,
    )
    .join('');

  const items = state.missing
    .map((item) => {
      const checked = state.toggled.has(item.requirement_id) ? ' checked' : '';
      const category = categoryOf(model, item.requirement_id);
      return `<li>
        <label>
          <input type="checkbox" data-rid="${escapeAttr(item.requirement_id)}"${checked}>
          <span class="badge badge-${escapeAttr(category)}">${escapeHtml(category)}</span>
          ${escapeHtml(item.requirement_id)}
          <span class="gap-status">${escapeHtml(item.status)}</span>
        </label>
      </li>`;
    })
    .join('\n      ');

  const body = state.missing.length
    ? `<p>${state.missing.length} requirement${state.missing.length === 1 ? '' : 's'} to go${state.reachable ? '' : ' (currently unreachable: a violated requirement has immutable evidence)'}.</p>
      <ol class="gap-list">${items}</ol>`
    : '<p class="gap-empty">Already achieved. Nothing is missing for this target.</p>';

  const projected = state.projected
    ? `<div class="gap-projection${state.stale ? ' stale' : ''}">
        Projected stage:
        <span data-level-value="${state.projected.strict_level}">${state.projected.strict_level}</span>
        ${escapeHtml(levelName(model, state.projected.strict_level))}
        ${state.stale ? '<span class="stale-indicator">stale</span>' : ''}
      </div>`
    : state.stale
      ? '<div class="gap-projection stale"><span class="stale-indicator">stale</span></div>'
      : '';

  root.innerHTML = `<div class="gap-explorer">
    <label>Target stage
      <select name="target">${targetOptions}</select>
    </label>
    ${body}
    ${projected}
  </div>`;

  const select = root.querySelector('select[name="target"]') as HTMLSelectElement;
  select.addEventListener('change', () => handlers.onTarget(Number(select.value)));
  for (const box of root.querySelectorAll('input[type="checkbox"][data-rid]')) {
    box.addEventListener('click', () =>
      handlers.onToggle((box as HTMLElement).dataset.rid as string),
    );
  }
}
