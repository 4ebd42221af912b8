/**
 * Dependency-aware question wizard. The queue is the server's
 * evaluation_order filtered down to unanswered requirements; the UI
 * never reorders it and never computes levels from answers. Level
 * numbers shown next to the wizard always come from the latest server
 * response.
 */

import { ApiError } from './api.js';
import type { ApiClient } from './api.js';
import { escapeAttr, escapeHtml } from './dom.js';
import type {
  EvidenceItemDoc,
  LevelSnapshot,
  ModelDoc,
  RequirementDoc,
  SessionDoc,
  StatusValue,
} from './types.js';

/** Requirements whose cards offer confirmed inventory entries as evidence. */
export const EVIDENCE_TARGETS = new Set(['R14', 'R23', 'R30']);

const STATUS_OPTIONS: Array<{ value: StatusValue; label: string }> = [
  { value: 'satisfied', label: 'Satisfied' },
  { value: 'violated', label: 'Violated' },
  { value: 'not_applicable', label: 'Not applicable' },
  { value: 'unknown', label: 'Still unknown' },
];

export interface WizardState {
  sessionId: string;
  revision: number;
  queue: string[];
  banner: string | null;
  level: LevelSnapshot | null;
}

export interface AnswerDraft {
  status: StatusValue;
  justification?: string;
  evidence?: EvidenceItemDoc[];
}

export interface EvidenceOption {
  value: string;
  label: string;
}

function isAnswered(session: SessionDoc, requirementId: string): boolean {
  const record = session.statuses[requirementId];
  return record !== undefined && record.status !== 'unknown';
}

/**
 * Queue = server evaluation_order minus answered requirements. Ids the
 * served model does not know are dropped, so the wizard can never show
 * a requirement that is absent from the model.
 */
export function buildQueue(model: ModelDoc, session: SessionDoc): string[] {
  const known = new Set(model.requirements.map((req) => req.id));
  return model.evaluation_order.filter(
    (rid) => known.has(rid) && !isAnswered(session, rid),
  );
}

export function newWizardState(model: ModelDoc, session: SessionDoc): WizardState {
  return {
    sessionId: session.session_id,
    revision: session.revision,
    queue: buildQueue(model, session),
    banner: null,
    level: null,
  };
}

export function currentRequirement(
  model: ModelDoc,
  state: WizardState,
): RequirementDoc | null {
  const head = state.queue[0];
  if (head === undefined) return null;
  return model.requirements.find((req) => req.id === head) ?? null;
}

/**
 * Advisory hints from the dependency edges: unanswered prerequisites of
 * the current card. They suggest an order but never block answering.
 */
export function dependencyHints(model: ModelDoc, state: WizardState): string[] {
  const current = currentRequirement(model, state);
  if (!current) return [];
  const pending = new Set(state.queue.slice(1));
  return current.dependencies
    .filter((dep) => pending.has(dep))
    .map((dep) => `Answering ${dep} first may help: ${current.id} depends on it.`);
}

/**
 * Submit the draft for the requirement at the head of the queue. The
 * response carries the new revision and the recomputed level, so the
 * gauge refreshes in the same round-trip. A 409 means another tab moved
 * the session forward: reload it, rebuild the queue, and tell the user
 * without blocking anything.
 */
export async function answerRequirement(
  client: ApiClient,
  model: ModelDoc,
  state: WizardState,
  draft: AnswerDraft,
): Promise<WizardState> {
  const rid = state.queue[0];
  if (rid === undefined) return state;
  try {
    const result = await client.putStatus(state.sessionId, rid, {
      status: draft.status,
      ...(draft.justification ? { justification: draft.justification } : {}),
      ...(draft.evidence && draft.evidence.length ? { evidence: draft.evidence } : {}),
      expected_revision: state.revision,
    });
    const rest = state.queue.slice(1);
    return {
      ...state,
      revision: result.revision,
      queue: draft.status === 'unknown' ? [...rest, rid] : rest,
      banner: null,
      level: result.level,
    };
  } catch (error) {
    if (error instanceof ApiError && error.status === 409) {
      const session = await client.getSession(state.sessionId);
      return {
        ...state,
        revision: session.revision,
        queue: buildQueue(model, session),
        banner: 'Another tab updated this assessment; your view was reloaded.',
      };
    }
    if (error instanceof ApiError) {
      return { ...state, banner: `${error.code}: ${error.message}` };
    }
    throw error;
  }
}

export interface WizardHandlers {
  onSubmit: (draft: AnswerDraft) => void;
}

export function renderWizard(
  root: HTMLElement,
  model: ModelDoc,
  state: WizardState,
  evidenceOptions: EvidenceOption[],
  handlers: WizardHandlers,
): void {
  const banner = state.banner
    ? `<div class="banner" role="status">${escapeHtml(state.banner)}</div>`
    : '';
  const current = currentRequirement(model, state);

  if (!current) {
    root.innerHTML = `${banner}<div class="wizard-done">Every requirement has an answer. Review the gauge or explore the gap to the next stage.</div>`;
    return;
  }

  const hints = dependencyHints(model, state);
  const hintsHtml = hints.length
    ? `<ul class="dep-hints">${hints.map((h) => `<li>${escapeHtml(h)}</li>`).join('')}</ul>`
    : '';
  const statusOptions = STATUS_OPTIONS.map(
    (opt) => `<option value="${opt.value}">${opt.label}</option>`,
  ).join('');
  const evidencePicker =
    EVIDENCE_TARGETS.has(current.id) && evidenceOptions.length
      ? `<label>Attach confirmed inventory evidence
          <select name="evidence">
            <option value="">None</option>
            ${evidenceOptions
              .map(
                (opt) =>
                  `<option value="${escapeAttr(opt.value)}">${escapeHtml(opt.label)}</option>`,
              )
              .join('')}
          </select>
        </label>`
      : '';
  const queuePreview = state.queue
    .slice(1, 6)
    .map((rid) => `<li>${escapeHtml(rid)}</li>`)
    .join('');

  root.innerHTML = `${banner}
  <div class="wizard-card" data-requirement-id="${escapeAttr(current.id)}">
    <h3><span class="req-id">${escapeHtml(current.id)}</span> ${escapeHtml(current.name)}</h3>
    <p class="req-desc">${escapeHtml(current.description)}</p>
    <details class="req-problem"><summary>Why this matters</summary><p>${escapeHtml(current.problem)}</p></details>
    <p class="req-acceptance"><strong>Accepted when:</strong> ${escapeHtml(current.acceptance)}</p>
    ${hintsHtml}
    <form class="answer-form">
      <label>Status
        <select name="status">${statusOptions}</select>
      </label>
      <label>Justification
        <textarea name="justification" rows="2" placeholder="Required for Not applicable"></textarea>
      </label>
      ${evidencePicker}
      <button type="submit">Record answer</button>
    </form>
  </div>
  <div class="queue-preview">
    <h4>${state.queue.length} question${state.queue.length === 1 ? '' : 's'} left</h4>
    <ol>${queuePreview}</ol>
  </div>`;

  const form = root.querySelector('form.answer-form') as HTMLFormElement;
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    const status = (form.elements.namedItem('status') as HTMLSelectElement)
      .value as StatusValue;
    const justification = (
      form.elements.namedItem('justification') as HTMLTextAreaElement
    ).value.trim();
    const evidenceSelect = form.elements.namedItem('evidence') as HTMLSelectElement | null;
    const evidence: EvidenceItemDoc[] =
      evidenceSelect && evidenceSelect.value
        ? [{ kind: 'inventory_ref', payload: evidenceSelect.value }]
        : [];
    handlers.onSubmit({
      status,
      ...(justification ? { justification } : {}),
      ...(evidence.length ? { evidence } : {}),
    });
  });
}
