import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import {
  confirmEntry,
  evidenceOptions,
  loadInventory,
  renderInventory,
} from '../src/inventory.js';
import type { InventoryViewState } from '../src/inventory.js';
import type { InventoryEntryDoc } from '../src/types.js';
import { StubApi } from './stub.js';

function entry(partial: Partial<InventoryEntryDoc> & { canonical: string }): InventoryEntryDoc {
  const { canonical, ...rest } = partial;
  return {
    algorithm: { canonical, family: 'hash' },
    strength: { rank: 0, label: 'broken', quantum_resistant: false },
    confirmed: false,
    needs_review: false,
    primitives: [],
    purpose: '',
    sources: ['app/auth.py:5'],
    ...rest,
  };
}

const INVENTORY = {
  entries: [
    entry({ canonical: 'MD5' }),
    entry({
      canonical: 'AES-256',
      algorithm: { canonical: 'AES-256', family: 'cipher' },
      strength: { rank: 3, label: 'strong', quantum_resistant: true },
      confirmed: true,
      purpose: 'data at rest',
    }),
  ],
};

function clientFor(stub: StubApi): ApiClient {
  return new ApiClient('', stub.fetch);
}

describe('confirmEntry', () => {
  it('sends the edits with confirmed=true and swaps in the updated entry', async () => {
    const stub = new StubApi()
      .json('GET', /\/scans\/s1\/inventory$/, INVENTORY)
      .on('PUT', /\/scans\/s1\/inventory\/MD5$/, ({ body }) => ({
        json: entry({
          canonical: 'MD5',
          confirmed: true,
          purpose: (body as { purpose: string }).purpose,
        }),
      }));
    const client = clientFor(stub);
    let state = await loadInventory(client, 's1');

    state = await confirmEntry(client, state, 'MD5', {
      purpose: 'download checksums',
      deployed_on: '2019-03-01',
    });

    expect(stub.calls('PUT', /MD5$/)[0]?.body).toEqual({
      purpose: 'download checksums',
      deployed_on: '2019-03-01',
      confirmed: true,
    });
    const updated = state.entries.find((row) => row.algorithm.canonical === 'MD5');
    expect(updated?.confirmed).toBe(true);
    expect(updated?.strength.label).toBe('broken');
    expect(state.inlineError).toBeNull();
  });

  it('keeps the entry and records an inline error on a validation failure', async () => {
    const stub = new StubApi()
      .json('GET', /\/scans\/s1\/inventory$/, INVENTORY)
      .on('PUT', /\/scans\/s1\/inventory\/MD5$/, () => ({
        status: 422,
        json: {
          code: 'INVALID_ANNOTATION',
          message: 'deactivated_on must not be before deployed_on',
        },
      }));
    const client = clientFor(stub);
    let state = await loadInventory(client, 's1');

    state = await confirmEntry(client, state, 'MD5', {
      deployed_on: '2020-01-01',
      deactivated_on: '2019-01-01',
    });

    expect(state.inlineError).toEqual({
      canonical: 'MD5',
      message: 'deactivated_on must not be before deployed_on',
    });
    const md5 = state.entries.find((row) => row.algorithm.canonical === 'MD5');
    expect(md5?.confirmed).toBe(false);
  });
});

describe('evidenceOptions', () => {
  it('offers confirmed entries only', () => {
    const state: InventoryViewState = {
      scanId: 's1',
      entries: INVENTORY.entries,
      inlineError: null,
    };

    const options = evidenceOptions(state);

    expect(options).toEqual([
      { value: 'scan:s1:AES-256', label: 'AES-256 (data at rest)' },
    ]);
  });

  it('is empty before any scan ran', () => {
    expect(
      evidenceOptions({ scanId: null, entries: [], inlineError: null }),
    ).toEqual([]);
  });
});

describe('renderInventory', () => {
  it('renders rows with strength and confirmation badges', () => {
    const state: InventoryViewState = {
      scanId: 's1',
      entries: INVENTORY.entries,
      inlineError: null,
    };
    const root = document.createElement('div');

    renderInventory(root, state, { onScan: () => {}, onConfirm: () => {} });

    const rows = [...root.querySelectorAll('.inventory-entry')];
    expect(rows).toHaveLength(2);
    expect(rows[0]?.querySelector('.strength-broken')?.textContent).toBe('broken');
    expect(rows[0]?.querySelector('.badge-unconfirmed')).not.toBeNull();
    expect(rows[1]?.querySelector('.badge-confirmed')).not.toBeNull();
    // confirmed entries no longer offer the confirm form
    expect(rows[0]?.querySelector('form.confirm-form')).not.toBeNull();
    expect(rows[1]?.querySelector('form.confirm-form')).toBeNull();
  });

  it('shows the inline error on the offending row', () => {
    const state: InventoryViewState = {
      scanId: 's1',
      entries: INVENTORY.entries,
      inlineError: { canonical: 'MD5', message: 'dates out of order' },
    };
    const root = document.createElement('div');

    renderInventory(root, state, { onScan: () => {}, onConfirm: () => {} });

    const row = root.querySelector('.inventory-entry[data-canonical="MD5"]');
    expect(row?.querySelector('.inline-error')?.textContent).toBe('dates out of order');
  });

  it('collects confirm form fields into edits', () => {
    const state: InventoryViewState = {
      scanId: 's1',
      entries: [entry({ canonical: 'MD5' })],
      inlineError: null,
    };
    const root = document.createElement('div');
    const confirmed: Array<{ canonical: string; edits: unknown }> = [];

    renderInventory(root, state, {
      onScan: () => {},
      onConfirm: (canonical, edits) => confirmed.push({ canonical, edits }),
    });
    const form = root.querySelector('form.confirm-form') as HTMLFormElement;
    (form.elements.namedItem('purpose') as HTMLInputElement).value = 'checksums';
    (form.elements.namedItem('deployed_on') as HTMLInputElement).value = '2019-03-01';
    form.dispatchEvent(new Event('submit', { cancelable: true }));

    expect(confirmed).toEqual([
      {
        canonical: 'MD5',
        edits: { purpose: 'checksums', deployed_on: '2019-03-01' },
      },
    ]);
  });
});
