import type { ApiSession, RoundMetrics } from './types.js';

/** Client-side view of one round: which tiles are shown and which are
 * locally selected. Selection stays local until SUBMIT. */
export type RoundView = {
  sessionId: string;
  round: number;
  tiles: string[]; // proposal ids in API order
  selected: Set<string>;
  metrics: RoundMetrics[]; // API values verbatim, one entry per past round
  status: 'active' | 'ended';
  inFlight: boolean;
};

export function viewFromSession(session: ApiSession): RoundView {
  return {
    sessionId: session.session_id,
    round: session.round,
    tiles: session.proposals.map((p) => p.id),
    selected: new Set<string>(),
    metrics: session.metrics,
    status: session.status,
    inFlight: false,
  };
}

/** Toggle a tile; clicking a selected tile un-selects it. Unknown tiles
 * and ended/in-flight views are ignored so stale clicks cannot corrupt
 * the selection. */
export function toggleSelection(view: RoundView, tileId: string): RoundView {
  if (view.status !== 'active' || view.inFlight || !view.tiles.includes(tileId)) {
    return view;
  }
  const selected = new Set(view.selected);
  if (selected.has(tileId)) {
    selected.delete(tileId);
  } else {
    selected.add(tileId);
  }
  return { ...view, selected };
}

export function selectionInOrder(view: RoundView): string[] {
  return view.tiles.filter((id) => view.selected.has(id));
}

/** Format one metrics row for display without recomputing anything. */
export function metricsLabel(entry: RoundMetrics): string {
  const parts = [`round ${entry.round}`, `selected ${entry.num_selected}`];
  if (entry.batch_auc !== undefined) {
    parts.push(`AUC ${entry.batch_auc.toFixed(3)}`);
  }
  if (entry.log_loss !== undefined) {
    parts.push(`log loss ${entry.log_loss.toFixed(3)}`);
  }
  return parts.join(' · ');
}
