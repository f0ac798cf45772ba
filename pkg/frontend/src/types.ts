export type ProposalTile = {
  id: string;
  image_url: string;
};

export type RoundMetrics = {
  round: number;
  num_selected: number;
  batch_auc?: number;
  log_loss?: number;
};

export type ApiSession = {
  session_id: string;
  catalog: string;
  strategy: string;
  seed: number;
  round: number;
  status: 'active' | 'ended';
  proposals: ProposalTile[];
  metrics: RoundMetrics[];
};

export type Transcript = {
  schema_version: number;
  session_id: string;
  strategy: string;
  seed: number;
  rounds: unknown[];
  [key: string]: unknown;
};

export const STRATEGIES = [
  'rand',
  'rand_reject',
  'exploit',
  'thompson',
  'nn',
  'everything',
] as const;

export type StrategyName = (typeof STRATEGIES)[number];
