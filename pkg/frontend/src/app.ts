/**
 * Single-page wiring: create or reopen a session, then keep the wizard,
 * gauge, gap explorer, and inventory panes in sync. All state shown
 * here is echoed from server responses; the page holds no assessment
 * logic of its own.
 */

import type { ApiClient } from './api.js';
import { el, escapeHtml } from './dom.js';
import { loadGap, renderGap, toggleItem } from './gap.js';
import type { GapViewState } from './gap.js';
import { renderGauge } from './gauge.js';
import {
  confirmEntry,
  emptyInventory,
  evidenceOptions,
  loadInventory,
  renderInventory,
} from './inventory.js';
import type { InventoryViewState } from './inventory.js';
import { answerRequirement, newWizardState, renderWizard } from './wizard.js';
import type { WizardState } from './wizard.js';
import type { LevelSnapshot, ModelDoc } from './types.js';

type PaneName = 'wizard' | 'gap' | 'inventory';

interface AppState {
  model: ModelDoc;
  wizard: WizardState;
  level: LevelSnapshot | null;
  gap: GapViewState | null;
  inventory: InventoryViewState;
  pane: PaneName;
}

function sessionIdFromHash(): string | null {
  const match = /#session=([0-9a-f]+)/.exec(window.location.hash);
  return match ? (match[1] as string) : null;
}

function shellHtml(subject: string): string {
  return `<header class="app-header">
    <h1>Crypto-agility assessment</h1>
    <p class="subject">Subject: <strong>${escapeHtml(subject)}</strong></p>
    <nav class="tabs">
      <button data-tab="wizard" class="active">Questions</button>
      <button data-tab="gap">Gap &amp; what-if</button>
      <button data-tab="inventory">Inventory</button>
    </nav>
  </header>
  <main>
    <section id="gauge-pane"></section>
    <section id="wizard-pane" class="pane"></section>
    <section id="gap-pane" class="pane" hidden></section>
    <section id="inventory-pane" class="pane" hidden></section>
  </main>`;
}

export async function initApp(root: HTMLElement, client: ApiClient): Promise<void> {
  const model = await client.getModel();
  const existing = sessionIdFromHash();
  if (existing) {
    await openSession(root, client, model, existing);
    return;
  }

  root.innerHTML = `<div class="session-create">
    <h1>Crypto-agility assessment</h1>
    <form class="create-form">
      <label>What are you assessing?
        <input name="subject" placeholder="e.g. payments platform" required>
      </label>
      <button type="submit">Start assessment</button>
    </form>
  </div>`;
  const form = el(root, 'form.create-form') as HTMLFormElement;
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    const subject = (form.elements.namedItem('subject') as HTMLInputElement).value.trim();
    if (!subject) return;
    void client.createSession(subject).then((created) => {
      window.location.hash = `session=${created.session_id}`;
      return openSession(root, client, model, created.session_id);
    });
  });
}

async function openSession(
  root: HTMLElement,
  client: ApiClient,
  model: ModelDoc,
  sessionId: string,
): Promise<void> {
  const session = await client.getSession(sessionId);
  const level = await client.getLevel(sessionId);
  const state: AppState = {
    model,
    wizard: newWizardState(model, session),
    level,
    gap: null,
    inventory: emptyInventory(),
    pane: 'wizard',
  };

  root.innerHTML = shellHtml(session.subject);
  for (const button of root.querySelectorAll('nav.tabs button')) {
    button.addEventListener('click', () => {
      state.pane = (button as HTMLElement).dataset.tab as PaneName;
      for (const other of root.querySelectorAll('nav.tabs button')) {
        other.classList.toggle('active', other === button);
      }
      if (state.pane === 'gap' && state.gap === null) {
        const target = Math.min((state.level?.strict_level ?? 0) + 1, 4);
        void loadGap(client, sessionId, target).then((gap) => {
          state.gap = gap;
          renderAll();
        });
      }
      renderAll();
    });
  }

  const renderAll = () => {
    el(root, '#wizard-pane').hidden = state.pane !== 'wizard';
    el(root, '#gap-pane').hidden = state.pane !== 'gap';
    el(root, '#inventory-pane').hidden = state.pane !== 'inventory';

    renderGauge(el(root, '#gauge-pane'), state.model.levels, state.level);
    renderWizard(
      el(root, '#wizard-pane'),
      state.model,
      state.wizard,
      evidenceOptions(state.inventory),
      {
        onSubmit: (draft) => {
          void answerRequirement(client, state.model, state.wizard, draft).then(
            (next) => {
              state.wizard = next;
              if (next.level) state.level = next.level;
              renderAll();
            },
          );
        },
      },
    );
    if (state.gap) {
      renderGap(el(root, '#gap-pane'), state.model, state.gap, {
        onToggle: (rid) => {
          if (!state.gap) return;
          void toggleItem(client, state.gap, rid).then((next) => {
            state.gap = next;
            renderAll();
          });
        },
        onTarget: (target) => {
          void loadGap(client, sessionId, target).then((next) => {
            state.gap = next;
            renderAll();
          });
        },
      });
    }
    renderInventory(el(root, '#inventory-pane'), state.inventory, {
      onScan: (scanRoot) => {
        void client
          .startScan(scanRoot)
          .then((created) => loadInventory(client, created.scan_id))
          .then((inventory) => {
            state.inventory = inventory;
            renderAll();
          });
      },
      onConfirm: (canonical, edits) => {
        void confirmEntry(client, state.inventory, canonical, edits).then((next) => {
          state.inventory = next;
          renderAll();
        });
      },
    });
  };

  renderAll();
}
