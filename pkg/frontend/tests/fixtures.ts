/** Compact model and session documents shaped like real server payloads. */

import type {
  LevelSnapshot,
  ModelDoc,
  RequirementDoc,
  SessionDoc,
} from '../src/types.js';

export const LEVELS = [
  { number: 0, name: 'Initial / Not possible' },
  { number: 1, name: 'Possible' },
  { number: 2, name: 'Prepared' },
  { number: 3, name: 'Practiced' },
  { number: 4, name: 'Sophisticated' },
];

function req(partial: Partial<RequirementDoc> & Pick<RequirementDoc, 'id' | 'level' | 'category'>): RequirementDoc {
  return {
    name: `${partial.id} name`,
    description: `${partial.id} description`,
    problem: `${partial.id} problem`,
    acceptance: `${partial.id} acceptance`,
    dependencies: [],
    examples: [],
    ...partial,
  };
}

export const MODEL: ModelDoc = {
  version: '1',
  levels: LEVELS,
  requirements: [
    req({ id: 'R10', level: 1, category: 'K', name: 'Crypto-agility awareness' }),
    req({ id: 'R11', level: 1, category: 'P', name: 'Update process', dependencies: ['R10'] }),
    req({ id: 'R12', level: 1, category: 'S', name: 'Updateable systems', dependencies: ['R11'] }),
    req({ id: 'R13', level: 1, category: 'P', name: 'Vulnerability monitoring', dependencies: ['R10'] }),
    req({ id: 'R14', level: 1, category: 'K', name: 'Algorithm inventory', dependencies: ['R10'] }),
    req({ id: 'R20', level: 2, category: 'S', name: 'Modular crypto', dependencies: ['R10', 'R11'] }),
    req({ id: 'R21', level: 2, category: 'K', name: 'Upgrade knowledge', dependencies: ['R14'] }),
  ],
  evaluation_order: ['R10', 'R11', 'R12', 'R13', 'R14', 'R20', 'R21'],
};

export const LEVEL_ONE_IDS = ['R10', 'R11', 'R12', 'R13', 'R14'];

export const SESSION_ID = 'a'.repeat(32);

export function freshSession(): SessionDoc {
  return {
    session_id: SESSION_ID,
    subject: 'payments platform',
    model_version: '1',
    revision: 0,
    statuses: {},
    history: [],
  };
}

export function snapshot(strict: number, optimistic: number): LevelSnapshot {
  return { strict_level: strict, optimistic_level: optimistic, blocking: {} };
}
