import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import {
  answerRequirement,
  buildQueue,
  currentRequirement,
  dependencyHints,
  newWizardState,
  renderWizard,
} from '../src/wizard.js';
import type { AnswerDraft } from '../src/wizard.js';
import { freshSession, MODEL, SESSION_ID, snapshot } from './fixtures.js';
import { StubApi } from './stub.js';

describe('buildQueue', () => {
  it('mirrors the served evaluation_order for a fresh session', () => {
    expect(buildQueue(MODEL, freshSession())).toEqual(MODEL.evaluation_order);
  });

  it('drops answered requirements but keeps unknown ones', () => {
    const session = freshSession();
    session.statuses = {
      R10: { status: 'satisfied' },
      R11: { status: 'unknown' },
      R13: { status: 'not_applicable', justification: 'outsourced' },
    };

    expect(buildQueue(MODEL, session)).toEqual(['R11', 'R12', 'R14', 'R20', 'R21']);
  });

  it('never includes a requirement the model does not serve', () => {
    const session = freshSession();
    session.statuses = { R99: { status: 'unknown' } };
    const withGhost = {
      ...MODEL,
      evaluation_order: [...MODEL.evaluation_order, 'R99'],
    };

    expect(buildQueue(withGhost, session)).not.toContain('R99');
  });
});

describe('dependency hints', () => {
  it('suggests unanswered prerequisites without blocking', () => {
    const session = freshSession();
    session.statuses = { R10: { status: 'satisfied' } };
    const state = newWizardState(MODEL, session);
    // queue head is R11, whose single dependency R10 is answered
    expect(dependencyHints(MODEL, state)).toEqual([]);

    state.queue = ['R12', 'R11'];
    expect(dependencyHints(MODEL, state)).toEqual([
      'Answering R11 first may help: R12 depends on it.',
    ]);
  });
});

describe('answerRequirement', () => {
  function clientFor(stub: StubApi): ApiClient {
    return new ApiClient('', stub.fetch);
  }

  it('advances the queue and adopts the level from the response', async () => {
    const stub = new StubApi().json('PUT', /\/requirements\/R10$/, {
      session_id: SESSION_ID,
      requirement_id: 'R10',
      revision: 1,
      level: snapshot(0, 4),
    });
    const state = newWizardState(MODEL, freshSession());

    const next = await answerRequirement(clientFor(stub), MODEL, state, {
      status: 'satisfied',
    });

    expect(next.queue[0]).toBe('R11');
    expect(next.revision).toBe(1);
    expect(next.level).toEqual(snapshot(0, 4));
    expect(next.banner).toBeNull();
  });

  it('rotates a question answered unknown to the back of the queue', async () => {
    const stub = new StubApi().json('PUT', /\/requirements\/R10$/, {
      session_id: SESSION_ID,
      requirement_id: 'R10',
      revision: 1,
      level: snapshot(0, 4),
    });
    const state = newWizardState(MODEL, freshSession());

    const next = await answerRequirement(clientFor(stub), MODEL, state, {
      status: 'unknown',
    });

    expect(next.queue[0]).toBe('R11');
    expect(next.queue[next.queue.length - 1]).toBe('R10');
  });

  it('passes justification and evidence through to the server', async () => {
    const stub = new StubApi().json('PUT', /\/requirements\/R10$/, {
      session_id: SESSION_ID,
      requirement_id: 'R10',
      revision: 1,
      level: snapshot(0, 4),
    });
    const state = newWizardState(MODEL, freshSession());
    const draft: AnswerDraft = {
      status: 'not_applicable',
      justification: 'handled by the platform team',
      evidence: [{ kind: 'note', payload: 'charter section 3' }],
    };

    await answerRequirement(clientFor(stub), MODEL, state, draft);

    expect(stub.log[0]?.body).toEqual({
      status: 'not_applicable',
      justification: 'handled by the platform team',
      evidence: [{ kind: 'note', payload: 'charter section 3' }],
      expected_revision: 0,
    });
  });

  it('reloads the session and shows a banner on a revision conflict', async () => {
    const reloaded = freshSession();
    reloaded.revision = 3;
    reloaded.statuses = {
      R10: { status: 'satisfied' },
      R11: { status: 'satisfied' },
    };
    const stub = new StubApi()
      .on('PUT', /\/requirements\/R10$/, () => ({
        status: 409,
        json: {
          code: 'REVISION_CONFLICT',
          message: 'expected revision 0, found 3',
          details: { current_revision: 3 },
        },
      }))
      .json('GET', /\/sessions\/[0-9a-f]+$/, reloaded);
    const state = newWizardState(MODEL, freshSession());

    const next = await answerRequirement(clientFor(stub), MODEL, state, {
      status: 'satisfied',
    });

    expect(next.revision).toBe(3);
    expect(next.queue).toEqual(['R12', 'R13', 'R14', 'R20', 'R21']);
    expect(next.banner).toMatch(/reloaded/);
  });

  it('surfaces validation errors as a banner without touching the queue', async () => {
    const stub = new StubApi().on('PUT', /\/requirements\/R10$/, () => ({
      status: 422,
      json: {
        code: 'MISSING_JUSTIFICATION',
        message: 'not_applicable requires a justification',
      },
    }));
    const state = newWizardState(MODEL, freshSession());

    const next = await answerRequirement(clientFor(stub), MODEL, state, {
      status: 'not_applicable',
    });

    expect(next.queue[0]).toBe('R10');
    expect(next.revision).toBe(0);
    expect(next.banner).toBe(
      'MISSING_JUSTIFICATION: not_applicable requires a justification',
    );
  });
});

describe('renderWizard', () => {
  it('shows the card for the queue head using only served strings', () => {
    const root = document.createElement('div');
    const state = newWizardState(MODEL, freshSession());

    renderWizard(root, MODEL, state, [], { onSubmit: () => {} });

    const card = root.querySelector('.wizard-card') as HTMLElement;
    expect(card.dataset.requirementId).toBe('R10');
    expect(card.textContent).toContain('Crypto-agility awareness');
    expect(card.textContent).toContain('R10 description');
    expect(card.textContent).toContain('R10 acceptance');
  });

  it('offers the evidence picker only on inventory-backed requirements', () => {
    const root = document.createElement('div');
    const state = newWizardState(MODEL, freshSession());
    const options = [{ value: 'scan:s1:MD5', label: 'MD5 (download checksums)' }];

    renderWizard(root, MODEL, state, options, { onSubmit: () => {} });
    expect(root.querySelector('select[name="evidence"]')).toBeNull();

    state.queue = ['R14'];
    renderWizard(root, MODEL, state, options, { onSubmit: () => {} });
    const picker = root.querySelector('select[name="evidence"]') as HTMLSelectElement;
    expect(picker).not.toBeNull();
    expect(picker.textContent).toContain('MD5 (download checksums)');
  });

  it('submits the draft from the form controls', () => {
    const root = document.createElement('div');
    const state = newWizardState(MODEL, freshSession());
    const drafts: AnswerDraft[] = [];

    renderWizard(root, MODEL, state, [], { onSubmit: (draft) => drafts.push(draft) });
    const form = root.querySelector('form.answer-form') as HTMLFormElement;
    (form.elements.namedItem('status') as HTMLSelectElement).value = 'not_applicable';
    (form.elements.namedItem('justification') as HTMLTextAreaElement).value =
      'no in-house crypto';
    form.dispatchEvent(new Event('submit', { cancelable: true }));

    expect(drafts).toEqual([
      { status: 'not_applicable', justification: 'no in-house crypto' },
    ]);
  });

  it('shows a completion note when the queue is empty', () => {
    const root = document.createElement('div');
    const session = freshSession();
    for (const req of MODEL.requirements) {
      session.statuses[req.id] = { status: 'satisfied' };
    }
    const state = newWizardState(MODEL, session);

    renderWizard(root, MODEL, state, [], { onSubmit: () => {} });

    expect(root.querySelector('.wizard-done')).not.toBeNull();
    expect(currentRequirement(MODEL, state)).toBeNull();
  });

  it('escapes markup in served strings', () => {
    const root = document.createElement('div');
    const hostile = {
      ...MODEL,
      requirements: MODEL.requirements.map((req) =>
        req.id === 'R10'
          ? { ...req, name: '<script>alert(1)</script>', description: 'a & b' }
          : req,
      ),
    };
    const state = newWizardState(hostile, freshSession());

    renderWizard(root, hostile, state, [], { onSubmit: () => {} });

    expect(root.innerHTML).not.toContain('<script>');
    expect(root.textContent).toContain('<script>alert(1)</script>');
  });
});
