/**
 * Wire types for the /api/v1 surface. These mirror the server's JSON
 * exactly; the UI adds nothing and computes nothing on top of them.
 */

export type StatusValue = 'satisfied' | 'violated' | 'unknown' | 'not_applicable';

export type CategoryCode = 'K' | 'P' | 'S';

export type EvidenceKind =
  | 'note'
  | 'file_ref'
  | 'inventory_ref'
  | 'policy_check_ref'
  | 'mosca_check_ref';

export interface LevelRow {
  number: number;
  name: string;
}

export interface RequirementDoc {
  id: string;
  level: number;
  category: CategoryCode;
  name: string;
  description: string;
  problem: string;
  acceptance: string;
  dependencies: string[];
  examples: string[];
}

export interface ModelDoc {
  version: string;
  levels: LevelRow[];
  requirements: RequirementDoc[];
  evaluation_order: string[];
}

export interface EvidenceItemDoc {
  kind: EvidenceKind;
  payload: string;
  recorded_at?: string;
  immutable?: boolean;
}

export interface StatusRecordDoc {
  status: StatusValue;
  justification?: string | null;
  evidence?: EvidenceItemDoc[];
}

export interface SessionSummary {
  session_id: string;
  subject: string;
  revision: number;
  model_version?: string;
}

export interface SessionDoc extends SessionSummary {
  model_version: string;
  statuses: Record<string, StatusRecordDoc>;
  history: unknown[];
}

/** Level numbers as reported by the server; never derived locally. */
export interface LevelSnapshot {
  strict_level: number;
  optimistic_level: number;
  blocking: Record<string, string[]>;
}

export interface LevelReport extends LevelSnapshot {
  session_id: string;
  subject: string;
  model_version: string;
}

export interface StatusUpdate {
  status: StatusValue;
  justification?: string;
  evidence?: EvidenceItemDoc[];
  expected_revision: number;
}

export interface StatusUpdateResult {
  session_id: string;
  requirement_id: string;
  revision: number;
  level: LevelSnapshot;
}

export interface GapItem {
  requirement_id: string;
  status: StatusValue;
}

export interface GapDoc {
  session_id: string;
  target_level: number;
  missing: GapItem[];
  reachable: boolean;
}

export interface WhatIfDoc {
  session_id: string;
  before: LevelSnapshot;
  after: LevelSnapshot;
}

export interface ScanCreated {
  scan_id: string;
  root: string;
  findings_count: number;
  warnings: string[];
}

export interface AlgorithmDoc {
  canonical: string;
  family: string;
}

export interface StrengthDoc {
  rank: number;
  label: string;
  quantum_resistant: boolean;
  classical_bits?: number;
}

export interface InventoryEntryDoc {
  algorithm: AlgorithmDoc;
  strength: StrengthDoc;
  confirmed: boolean;
  needs_review: boolean;
  primitives: string[];
  purpose: string;
  sources: string[];
  key_length_bits?: number;
  deployed_on?: string;
  deactivated_on?: string;
}

export interface InventoryDoc {
  entries: InventoryEntryDoc[];
}

export interface EntryEdits {
  purpose?: string;
  primitives?: string[];
  key_length_bits?: number;
  deployed_on?: string;
  deactivated_on?: string;
  confirmed?: boolean;
}

export interface ErrorEnvelope {
  code: string;
  message: string;
  details?: unknown;
}
