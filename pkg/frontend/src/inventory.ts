/**
 * Inventory confirmation table. Scan hits stay "unconfirmed" until a
 * human adds a purpose and dates; only confirmed entries are offered as
 * evidence in the wizard. Server-side validation errors (for example a
 * deactivation date before deployment) render inline on the row.
 */

import { ApiError } from './api.js';
import type { ApiClient } from './api.js';
import { escapeAttr, escapeHtml } from './dom.js';
import type { EntryEdits, InventoryEntryDoc } from './types.js';
import type { EvidenceOption } from './wizard.js';

export interface InventoryViewState {
  scanId: string | null;
  entries: InventoryEntryDoc[];
  inlineError: { canonical: string; message: string } | null;
}

export function emptyInventory(): InventoryViewState {
  return { scanId: null, entries: [], inlineError: null };
}

export async function loadInventory(
  client: ApiClient,
  scanId: string,
): Promise<InventoryViewState> {
  const doc = await client.getInventory(scanId);
  return { scanId, entries: doc.entries, inlineError: null };
}

export async function confirmEntry(
  client: ApiClient,
  state: InventoryViewState,
  canonical: string,
  edits: EntryEdits,
): Promise<InventoryViewState> {
  if (state.scanId === null) return state;
  try {
    const updated = await client.annotateEntry(state.scanId, canonical, {
      ...edits,
      confirmed: true,
    });
    return {
      ...state,
      entries: state.entries.map((entry) =>
        entry.algorithm.canonical === canonical ? updated : entry,
      ),
      inlineError: null,
    };
  } catch (error) {
    if (error instanceof ApiError) {
      return { ...state, inlineError: { canonical, message: error.message } };
    }
    throw error;
  }
}

/** Confirmed entries only; unconfirmed hits are not yet evidence. */
export function evidenceOptions(state: InventoryViewState): EvidenceOption[] {
  if (state.scanId === null) return [];
  const scanId = state.scanId;
  return state.entries
    .filter((entry) => entry.confirmed)
    .map((entry) => ({
      value: `scan:${scanId}:${entry.algorithm.canonical}`,
      label: `${entry.algorithm.canonical} (${entry.purpose || 'no purpose recorded'})`,
    }));
}

export interface InventoryHandlers {
  onScan: (root: string) => void;
  onConfirm: (canonical: string, edits: EntryEdits) => void;
}

function entryRow(
  entry: InventoryEntryDoc,
  inlineError: InventoryViewState['inlineError'],
): string {
  const canonical = entry.algorithm.canonical;
  const badge = entry.confirmed
    ? '<span class="badge badge-confirmed">confirmed</span>'
    : '<span class="badge badge-unconfirmed">unconfirmed</span>';
  const review = entry.needs_review ? '<span class="badge badge-review">needs review</span>' : '';
  const error =
    inlineError && inlineError.canonical === canonical
      ? `<p class="inline-error">${escapeHtml(inlineError.message)}</p>`
      : '';
  const confirmForm = entry.confirmed
    ? ''
    : `<form class="confirm-form" data-canonical="${escapeAttr(canonical)}">
        <input name="purpose" placeholder="Purpose" value="${escapeAttr(entry.purpose)}">
        <input name="deployed_on" placeholder="Deployed on (YYYY-MM-DD)">
        <input name="deactivated_on" placeholder="Deactivated on (optional)">
        <button type="submit">Confirm</button>
      </form>`;
  return `<li class="inventory-entry" data-canonical="${escapeAttr(canonical)}">
    <div class="entry-head">
      <strong>${escapeHtml(canonical)}</strong>
      <span class="entry-family">${escapeHtml(entry.algorithm.family)}</span>
      <span class="strength strength-${escapeAttr(entry.strength.label)}">${escapeHtml(entry.strength.label)}</span>
      ${badge} ${review}
    </div>
    <div class="entry-sources">${entry.sources.length} source location${entry.sources.length === 1 ? '' : 's'}</div>
    ${error}
    ${confirmForm}
  </li>`;
}

export function renderInventory(
  root: HTMLElement,
  state: InventoryViewState,
  handlers: InventoryHandlers,
): void {
  const rows = state.entries
    .map((entry) => entryRow(entry, state.inlineError))
    .join('\n    ');
  const table = state.scanId
    ? `<ul class="inventory-list">${rows}</ul>`
    : '<p class="inventory-empty">Run a scan to build the inventory.</p>';

  root.innerHTML = `<div class="inventory">
    <form class="scan-form">
      <input name="root" placeholder="Directory to scan" required>
      <button type="submit">Scan</button>
    </form>
    ${table}
  </div>`;

  const scanForm = root.querySelector('form.scan-form') as HTMLFormElement;
  scanForm.addEventListener('submit', (event) => {
    event.preventDefault();
    const value = (scanForm.elements.namedItem('root') as HTMLInputElement).value.trim();
    if (value) handlers.onScan(value);
  });

  for (const form of root.querySelectorAll('form.confirm-form')) {
    form.addEventListener('submit', (event) => {
      event.preventDefault();
      const confirm = form as HTMLFormElement;
      const canonical = confirm.dataset.canonical as string;
      const read = (name: string) =>
        (confirm.elements.namedItem(name) as HTMLInputElement).value.trim();
      const edits: EntryEdits = { purpose: read('purpose') };
      const deployed = read('deployed_on');
      const deactivated = read('deactivated_on');
      if (deployed) edits.deployed_on = deployed;
      if (deactivated) edits.deactivated_on = deactivated;
      handlers.onConfirm(canonical, edits);
    });
  }
}
