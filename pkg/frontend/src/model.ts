/**
 * Board domain records and the derived presentation layers.
 *
 * Record shapes mirror the server's canonical state encoding exactly:
 * the replica serializes these records back into the digested document,
 * so field names, nullability, and value quantization all match the
 * authority. The layer functions (aggregate badges, mission strip,
 * individual badges, warning menu, scroll window, pipe filtering) are
 * pure: same state and view in, same layers out, on every console.
 */

import { ValidationError } from "./errors.js";
import { evaluateQuery, type QueryExpr } from "./query.js";
import type { Topology } from "./topology.js";

// ---------------------------------------------------------------------------
// Record shapes (exactly the canonical state encoding)

export type AlertCategory = "health" | "security" | "performance";
export type AlertStatus = "unassigned" | "tasked";
export type SubjectKind = "asset" | "subzone" | "pipe";

export interface SubjectRec {
  kind: SubjectKind;
  ref: string;
}

export interface AlertRec {
  id: string;
  category: AlertCategory;
  status: AlertStatus;
  subject: SubjectRec;
  summary: string;
  raised_at: number;
  status_changed_at: number;
  ticket_id: string | null;
  primary_mission: string | null;
}

export interface PipeRec {
  id: string;
  endpoint_a: string;
  endpoint_b: string;
  available_bp: number;
  current_bp: number;
  alert_id: string;
}

export interface NoteRec {
  at: number;
  author: string;
  text: string;
}

export interface TicketRec {
  id: string;
  alert_id: string;
  assignee: string;
  notes: NoteRec[];
  state: "open";
}

export interface QueryRec {
  id: string;
  label: string;
  expression: string;
  color: string;
  active: boolean;
}

export interface ViewRec {
  active_missions: string[];
  active_queries: string[];
}

export const CATEGORY_ORDER: readonly AlertCategory[] = ["health", "security", "performance"];

export const BADGE_ICONS: Record<AlertCategory, string> = {
  health: "heart",
  security: "shield",
  performance: "speedometer",
};

export const STATUS_COLORS: Record<AlertStatus, "red" | "yellow"> = {
  unassigned: "red",
  tasked: "yellow",
};

export const NEUTRAL_CAPSULE = "neutral";

export const MAX_ACTIVE_QUERIES = 8;

/** Endpoints of every pipe ever seen, keyed by pipe id (ids never recycle). */
export type PipeEndpoints = Map<string, [string, string]>;

// ---------------------------------------------------------------------------
// Quantization

/**
 * Fractions land on the wire as floats but live in state as basis
 * points. Rounding is round-half-to-even on the IEEE double product,
 * the same result the authority computes.
 */
export function quantizeFraction(value: number, name: string): number {
  if (typeof value !== "number" || Number.isNaN(value)) {
    throw new ValidationError(`${name} must be a number in [0, 1]`);
  }
  if (!(value >= 0.0 && value <= 1.0)) {
    throw new ValidationError(`${name} ${value} out of range [0, 1]`);
  }
  const x = value * 10000;
  const floor = Math.floor(x);
  const diff = x - floor;
  if (diff > 0.5) return floor + 1;
  if (diff < 0.5) return floor;
  return floor % 2 === 0 ? floor : floor + 1;
}

// ---------------------------------------------------------------------------
// Classification

/** Assets degraded by a problem on the given subject. */
export function affectedAssets(
  subject: SubjectRec,
  topology: Topology,
  pipeEndpoints: PipeEndpoints,
): Set<string> {
  if (subject.kind === "asset") {
    if (!topology.assetsById.has(subject.ref)) {
      throw new ValidationError(`unknown asset '${subject.ref}'`);
    }
    return new Set([subject.ref]);
  }
  if (subject.kind === "subzone") {
    const ids = topology.subZoneAssetIds.get(subject.ref);
    if (ids === undefined) {
      throw new ValidationError(`unknown subzone '${subject.ref}'`);
    }
    return new Set(ids);
  }
  const pair = pipeEndpoints.get(subject.ref);
  if (pair === undefined) {
    throw new ValidationError(`unknown pipe '${subject.ref}'`);
  }
  const out = new Set(topology.subZoneAssetIds.get(pair[0])!);
  for (const aid of topology.subZoneAssetIds.get(pair[1])!) out.add(aid);
  return out;
}

/**
 * Mission most affected by a problem on the subject: largest overlap
 * between affected assets and the mission dependency set, ties to the
 * lower mission rank, null when no mission is touched at all.
 */
export function classifyMissionImpact(
  subject: SubjectRec,
  topology: Topology,
  pipeEndpoints: PipeEndpoints,
): string | null {
  const affected = affectedAssets(subject, topology, pipeEndpoints);
  let bestId: string | null = null;
  let bestCount = 0;
  for (const mission of topology.missionsByRank) {
    let count = 0;
    for (const aid of topology.dependencySets.get(mission.id)!) {
      if (affected.has(aid)) count += 1;
    }
    if (count > bestCount) {
      bestId = mission.id;
      bestCount = count;
    }
  }
  return bestId;
}

/** Sub-zone a non-pipe alert rolls up into; null for pipe subjects. */
export function subjectSubZone(subject: SubjectRec, topology: Topology): string | null {
  if (subject.kind === "asset") {
    return topology.assetsById.get(subject.ref)!.sub_zone_id;
  }
  if (subject.kind === "subzone") {
    return subject.ref;
  }
  return null;
}

// ---------------------------------------------------------------------------
// Aggregate badges

export interface AggregateBadge {
  subZoneId: string;
  redCount: number;
  yellowCount: number;
}

function compareLayout(a: [number, number], b: [number, number]): number {
  if (a[0] !== b[0]) return a[0] - b[0];
  return a[1] - b[1];
}

/**
 * Per-sub-zone red/yellow counts, in panel layout order. Pipe-subject
 * alerts are excluded: they render as pipes, not ovals.
 */
export function aggregateBadges(liveAlerts: Iterable<AlertRec>, topology: Topology): AggregateBadge[] {
  const counts = new Map<string, [number, number]>();
  for (const alert of liveAlerts) {
    const sz = subjectSubZone(alert.subject, topology);
    if (sz === null) continue;
    let pair = counts.get(sz);
    if (pair === undefined) {
      pair = [0, 0];
      counts.set(sz, pair);
    }
    if (alert.status === "unassigned") pair[0] += 1;
    else if (alert.status === "tasked") pair[1] += 1;
  }
  const ordered = [...counts.keys()].sort((a, b) =>
    compareLayout(topology.layoutKey(a), topology.layoutKey(b)),
  );
  return ordered.map((sz) => ({
    subZoneId: sz,
    redCount: counts.get(sz)![0],
    yellowCount: counts.get(sz)![1],
  }));
}

// ---------------------------------------------------------------------------
// Mission layers

function missionDeps(topology: Topology, missionId: string): Set<string> {
  const deps = topology.dependencySets.get(missionId);
  if (deps === undefined) {
    throw new ValidationError(`unknown mission '${missionId}'`);
  }
  return deps;
}

function intersects(a: Set<string>, b: Set<string>): boolean {
  const [small, large] = a.size <= b.size ? [a, b] : [b, a];
  for (const v of small) if (large.has(v)) return true;
  return false;
}

/** Panel position used to order the strip; pipes use their leftmost end. */
function stripPosition(
  alert: AlertRec,
  topology: Topology,
  pipeEndpoints: PipeEndpoints,
): [number, number] {
  const subject = alert.subject;
  if (subject.kind === "asset") {
    return topology.layoutKey(topology.assetsById.get(subject.ref)!.sub_zone_id);
  }
  if (subject.kind === "subzone") {
    return topology.layoutKey(subject.ref);
  }
  const [a, b] = pipeEndpoints.get(subject.ref)!;
  const ka = topology.layoutKey(a);
  const kb = topology.layoutKey(b);
  return compareLayout(ka, kb) <= 0 ? ka : kb;
}

/**
 * Unassigned alerts impacting the mission, swept left to right in panel
 * layout order with raise time and id as tie-breaks.
 */
export function computeStrip(
  topology: Topology,
  liveAlerts: AlertRec[],
  pipeEndpoints: PipeEndpoints,
  missionId: string,
): string[] {
  const deps = missionDeps(topology, missionId);
  const hits = liveAlerts.filter(
    (a) =>
      a.status === "unassigned" && intersects(affectedAssets(a.subject, topology, pipeEndpoints), deps),
  );
  hits.sort((a, b) => {
    const cmp = compareLayout(
      stripPosition(a, topology, pipeEndpoints),
      stripPosition(b, topology, pipeEndpoints),
    );
    if (cmp !== 0) return cmp;
    if (a.raised_at !== b.raised_at) return a.raised_at - b.raised_at;
    return a.id < b.id ? -1 : a.id > b.id ? 1 : 0;
  });
  return hits.map((a) => a.id);
}

/**
 * Alerts drawn as their own badge instead of an aggregate count: those
 * touching any active mission's dependency set.
 */
export function individualBadges(
  liveAlerts: AlertRec[],
  activeMissions: string[],
  topology: Topology,
  pipeEndpoints: PipeEndpoints,
): Set<string> {
  if (activeMissions.length === 0) return new Set();
  const deps = new Set<string>();
  for (const mid of activeMissions) {
    for (const aid of missionDeps(topology, mid)) deps.add(aid);
  }
  const out = new Set<string>();
  for (const a of liveAlerts) {
    if (intersects(affectedAssets(a.subject, topology, pipeEndpoints), deps)) out.add(a.id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Warning menu

export interface MenuEntry {
  alertId: string;
  category: AlertCategory;
  text: string;
  /** "red" | "yellow", tracks alert status. */
  capsuleRight: string;
  /** Primary mission's color, or the neutral token. */
  capsuleLeft: string;
}

/**
 * Warning menu entries for every live alert, pipe alerts included.
 * Categories keep a fixed health / security / performance order; within
 * a category, alerts whose primary mission is active float to the top,
 * then unassigned before tasked, then newest first.
 */
export function buildMenu(
  liveAlerts: AlertRec[],
  activeMissions: string[],
  topology: Topology,
): MenuEntry[] {
  const active = new Set(activeMissions);
  const missionColors = new Map(topology.missions.map((m) => [m.id, m.color]));

  const sorted = [...liveAlerts].sort((a, b) => {
    const ca = CATEGORY_ORDER.indexOf(a.category);
    const cb = CATEGORY_ORDER.indexOf(b.category);
    if (ca !== cb) return ca - cb;
    const ma = a.primary_mission !== null && active.has(a.primary_mission) ? 0 : 1;
    const mb = b.primary_mission !== null && active.has(b.primary_mission) ? 0 : 1;
    if (ma !== mb) return ma - mb;
    const sa = a.status === "unassigned" ? 0 : 1;
    const sb = b.status === "unassigned" ? 0 : 1;
    if (sa !== sb) return sa - sb;
    if (a.raised_at !== b.raised_at) return b.raised_at - a.raised_at;
    return a.id < b.id ? -1 : a.id > b.id ? 1 : 0;
  });

  return sorted.map((alert) => ({
    alertId: alert.id,
    category: alert.category,
    text: alert.summary,
    capsuleRight: STATUS_COLORS[alert.status],
    capsuleLeft:
      alert.primary_mission !== null
        ? (missionColors.get(alert.primary_mission) ?? NEUTRAL_CAPSULE)
        : NEUTRAL_CAPSULE,
  }));
}

/**
 * Deterministic scroll window: each category gets `windowSize` rows; a
 * group that fits is shown whole, a larger one rotates one entry per
 * tick, wrapping cyclically.
 */
export function menuWindow(menu: MenuEntry[], windowSize: number, tick: number): MenuEntry[] {
  if (windowSize < 1) {
    throw new ValidationError("window_size must be >= 1");
  }
  const out: MenuEntry[] = [];
  for (const category of CATEGORY_ORDER) {
    const group = menu.filter((e) => e.category === category);
    const n = group.length;
    if (n <= windowSize) {
      out.push(...group);
    } else {
      const start = tick % n;
      for (let i = 0; i < windowSize; i++) {
        out.push(group[(start + i) % n]);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pipes

/**
 * Pipes shown on the board, oldest problem first. With missions active,
 * only pipes with an endpoint sub-zone containing a dependency asset of
 * an active mission remain visible.
 */
export function visiblePipes(
  pipes: PipeRec[],
  alertsById: Map<string, AlertRec>,
  activeMissions: string[],
  topology: Topology,
): PipeRec[] {
  const ordered = [...pipes].sort((a, b) => {
    const ra = alertsById.get(a.alert_id)!.raised_at;
    const rb = alertsById.get(b.alert_id)!.raised_at;
    if (ra !== rb) return ra - rb;
    return a.id < b.id ? -1 : a.id > b.id ? 1 : 0;
  });
  if (activeMissions.length === 0) return ordered;
  const relevant = new Set<string>();
  for (const mid of activeMissions) {
    for (const aid of topology.dependencySets.get(mid)!) {
      relevant.add(topology.assetsById.get(aid)!.sub_zone_id);
    }
  }
  return ordered.filter((p) => relevant.has(p.endpoint_a) || relevant.has(p.endpoint_b));
}

/** Red while the pipe's alert is unassigned, yellow once tasked. */
export function pipeColor(pipe: PipeRec, alertsById: Map<string, AlertRec>): "red" | "yellow" {
  const alert = alertsById.get(pipe.alert_id)!;
  return alert.status === "unassigned" ? "red" : "yellow";
}

// ---------------------------------------------------------------------------
// All layers together

export interface QueryHighlight {
  assetIds: Set<string>;
  subZoneIds: Set<string>;
}

export interface BoardLayers {
  missionHighlights: Map<string, Set<string>>;
  queryHighlights: Map<string, QueryHighlight>;
  strip: Map<string, string[]>;
  individualBadges: Set<string>;
  menu: MenuEntry[];
  visiblePipes: string[];
}

/** Compute every derived layer for the current view. Pure. */
export function deriveLayers(
  topology: Topology,
  liveAlerts: AlertRec[],
  livePipes: PipeRec[],
  queryExprs: Map<string, QueryExpr>,
  pipeEndpoints: PipeEndpoints,
  view: ViewRec,
): BoardLayers {
  const alertsById = new Map(liveAlerts.map((a) => [a.id, a]));
  const missionHighlights = new Map<string, Set<string>>();
  const strip = new Map<string, string[]>();
  for (const mid of view.active_missions) {
    missionHighlights.set(mid, topology.subzonesTouching(missionDeps(topology, mid)));
    strip.set(mid, computeStrip(topology, liveAlerts, pipeEndpoints, mid));
  }
  const queryHighlights = new Map<string, QueryHighlight>();
  for (const qid of view.active_queries) {
    const matched = evaluateQuery(queryExprs.get(qid)!, topology);
    queryHighlights.set(qid, {
      assetIds: matched,
      subZoneIds: topology.subzonesTouching(matched),
    });
  }
  return {
    missionHighlights,
    queryHighlights,
    strip,
    individualBadges: individualBadges(liveAlerts, view.active_missions, topology, pipeEndpoints),
    menu: buildMenu(liveAlerts, view.active_missions, topology),
    visiblePipes: visiblePipes(livePipes, alertsById, view.active_missions, topology).map((p) => p.id),
  };
}
