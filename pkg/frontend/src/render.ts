/**
 * View-ready projection of the board and its HTML rendering.
 *
 * RenderModel is a deterministic function of (replica state, scroll
 * tick, window size): positioned zone boxes in layout order, aggregate
 * ovals with red/yellow counts, individual badge glyphs, mission tabs
 * (solid when active), query tabs, the windowed warning menu with its
 * capsules, pipe bars with outer/inner bands, and the red strip path
 * per active mission. Replaying the same delta stream yields the same
 * RenderModel sequence; rejected commands change nothing.
 *
 * The clock shows the event time of the last accepted command, not the
 * wall clock, so identical streams render identical boards.
 */

import {
  BADGE_ICONS,
  STATUS_COLORS,
  aggregateBadges,
  menuWindow,
  pipeColor,
  subjectSubZone,
  type AlertCategory,
  type BoardLayers,
} from "./model.js";
import type { BoardReplica } from "./replica.js";

export interface RenderedSubZone {
  id: string;
  displayName: string;
  kind: string;
  /** Aggregate oval counts, or null when the sub-zone is clean. */
  badge: { red: number; yellow: number } | null;
  /** Mission-relevant alerts drawn individually instead of aggregated. */
  individualAlerts: Array<{ alertId: string; icon: string; color: string }>;
  /** Colors of active missions with a dependency asset here, activation order. */
  missionTints: string[];
  /** Colors of active queries matching at least one asset here, activation order. */
  queryTints: string[];
}

export interface RenderedZone {
  id: string;
  displayName: string;
  subZones: RenderedSubZone[];
}

export interface RenderedTab {
  id: string;
  label: string;
  color: string;
  active: boolean;
  /** Active tabs render solid, inactive ones hollow. */
  solid: boolean;
}

export interface RenderedQueryTab extends RenderedTab {
  expression: string;
}

export interface RenderedPipe {
  id: string;
  from: string;
  to: string;
  color: "red" | "yellow";
  /** Outer band: available capacity, percent of nominal. */
  availablePct: number;
  /** Inner band: live utilization, percent of nominal. */
  currentPct: number;
}

export interface RenderedStrip {
  missionId: string;
  color: string;
  /** Alert ids the strip passes through, left to right. */
  alertIds: string[];
}

export interface RenderedMenuEntry {
  alertId: string;
  category: AlertCategory;
  icon: string;
  text: string;
  capsuleLeft: string;
  capsuleRight: string;
}

export interface RenderModel {
  networkName: string;
  seq: number;
  digest: string;
  /** UTC clock of the last accepted command, empty before any. */
  clock: string;
  zones: RenderedZone[];
  missionTabs: RenderedTab[];
  queryTabs: RenderedQueryTab[];
  pipes: RenderedPipe[];
  strips: RenderedStrip[];
  menu: RenderedMenuEntry[];
  menuTotals: Record<AlertCategory, number>;
}

export interface RenderOptions {
  tick?: number;
  windowSize?: number;
}

export function buildRenderModel(replica: BoardReplica, options: RenderOptions = {}): RenderModel {
  const tick = options.tick ?? 0;
  const windowSize = options.windowSize ?? 4;
  const topology = replica.topology;
  const layers: BoardLayers = replica.layers();
  const liveAlerts = replica.liveAlerts();
  const alertsById = new Map(liveAlerts.map((a) => [a.id, a]));
  const view = replica.boardView();

  const badges = new Map(
    aggregateBadges(liveAlerts, topology).map((b) => [b.subZoneId, b] as const),
  );

  // Individually drawn alerts grouped per sub-zone (pipes draw as pipes).
  const individualBySubZone = new Map<string, Array<{ alertId: string; icon: string; color: string }>>();
  const individualSorted = [...layers.individualBadges]
    .map((id) => alertsById.get(id)!)
    .sort((a, b) =>
      a.raised_at !== b.raised_at ? a.raised_at - b.raised_at : a.id < b.id ? -1 : a.id > b.id ? 1 : 0,
    );
  for (const alert of individualSorted) {
    const sz = subjectSubZone(alert.subject, topology);
    if (sz === null) continue;
    let list = individualBySubZone.get(sz);
    if (list === undefined) {
      list = [];
      individualBySubZone.set(sz, list);
    }
    list.push({
      alertId: alert.id,
      icon: BADGE_ICONS[alert.category],
      color: STATUS_COLORS[alert.status],
    });
  }

  const missionColors = new Map(topology.missions.map((m) => [m.id, m.color]));
  const queryById = new Map(replica.savedQueries().map((q) => [q.id, q]));

  const zones: RenderedZone[] = [...topology.doc.zones]
    .sort((a, b) => a.layout_rank - b.layout_rank)
    .map((zone) => ({
      id: zone.id,
      displayName: zone.display_name,
      subZones: [...zone.sub_zones]
        .sort((a, b) => a.layout_rank - b.layout_rank)
        .map((sz) => {
          const badge = badges.get(sz.id);
          const missionTints: string[] = [];
          for (const mid of view.active_missions) {
            if (layers.missionHighlights.get(mid)!.has(sz.id)) {
              missionTints.push(missionColors.get(mid)!);
            }
          }
          const queryTints: string[] = [];
          for (const qid of view.active_queries) {
            if (layers.queryHighlights.get(qid)!.subZoneIds.has(sz.id)) {
              queryTints.push(queryById.get(qid)!.color);
            }
          }
          return {
            id: sz.id,
            displayName: sz.display_name,
            kind: sz.kind,
            badge: badge === undefined ? null : { red: badge.redCount, yellow: badge.yellowCount },
            individualAlerts: individualBySubZone.get(sz.id) ?? [],
            missionTints,
            queryTints,
          };
        }),
    }));

  const activeMissions = new Set(view.active_missions);
  const missionTabs: RenderedTab[] = topology.missions.map((m) => ({
    id: m.id,
    label: m.display_name,
    color: m.color,
    active: activeMissions.has(m.id),
    solid: activeMissions.has(m.id),
  }));

  const activeQueries = new Set(view.active_queries);
  const queryTabs: RenderedQueryTab[] = replica
    .savedQueries()
    .sort((a, b) => (a.id < b.id ? -1 : a.id > b.id ? 1 : 0))
    .map((q) => ({
      id: q.id,
      label: q.label,
      color: q.color,
      active: activeQueries.has(q.id),
      solid: activeQueries.has(q.id),
      expression: q.expression,
    }));

  const pipesById = new Map(replica.livePipes().map((p) => [p.id, p]));
  const pipes: RenderedPipe[] = layers.visiblePipes.map((pid) => {
    const pipe = pipesById.get(pid)!;
    return {
      id: pipe.id,
      from: pipe.endpoint_a,
      to: pipe.endpoint_b,
      color: pipeColor(pipe, alertsById),
      availablePct: pipe.available_bp / 100,
      currentPct: pipe.current_bp / 100,
    };
  });

  const strips: RenderedStrip[] = view.active_missions.map((mid) => ({
    missionId: mid,
    color: missionColors.get(mid)!,
    alertIds: layers.strip.get(mid)!,
  }));

  const menuTotals: Record<AlertCategory, number> = { health: 0, security: 0, performance: 0 };
  for (const entry of layers.menu) menuTotals[entry.category] += 1;

  const menu: RenderedMenuEntry[] = menuWindow(layers.menu, windowSize, tick).map((entry) => ({
    alertId: entry.alertId,
    category: entry.category,
    icon: BADGE_ICONS[entry.category],
    text: entry.text,
    capsuleLeft: entry.capsuleLeft,
    capsuleRight: entry.capsuleRight,
  }));

  return {
    networkName: topology.networkName,
    seq: replica.seq,
    digest: replica.digest(),
    clock: replica.lastAcceptedAt === null ? "" : new Date(replica.lastAcceptedAt).toISOString(),
    zones,
    missionTabs,
    queryTabs,
    pipes,
    strips,
    menu,
    menuTotals,
  };
}

// ---------------------------------------------------------------------------
// Static HTML export

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function tintStyle(tints: string[]): string {
  if (tints.length === 0) return "";
  return ` style="box-shadow:${tints.map((t, i) => `0 0 0 ${2 * (i + 1)}px ${esc(t)}`).join(",")}"`;
}

/** Render the model to a self-contained HTML document body. */
export function renderHtml(model: RenderModel): string {
  const parts: string[] = [];
  parts.push(`<div class="board" data-seq="${model.seq}" data-digest="${model.digest}">`);
  parts.push(
    `<header><span class="network-name">${esc(model.networkName)}</span>` +
      `<span class="clock">${esc(model.clock)}</span></header>`,
  );

  parts.push('<nav class="tabs">');
  for (const tab of model.missionTabs) {
    parts.push(
      `<button class="tab mission ${tab.solid ? "solid" : "hollow"}" data-mission="${esc(tab.id)}"` +
        ` style="--tab-color:${esc(tab.color)}">${esc(tab.label)}</button>`,
    );
  }
  for (const tab of model.queryTabs) {
    parts.push(
      `<button class="tab query ${tab.solid ? "solid" : "hollow"}" data-query="${esc(tab.id)}"` +
        ` style="--tab-color:${esc(tab.color)}" title="${esc(tab.expression)}">${esc(tab.label)}</button>`,
    );
  }
  parts.push("</nav>");

  parts.push('<main class="panel">');
  for (const zone of model.zones) {
    parts.push(`<section class="zone" data-zone="${esc(zone.id)}"><h2>${esc(zone.displayName)}</h2>`);
    for (const sz of zone.subZones) {
      const tints = [...sz.missionTints, ...sz.queryTints];
      parts.push(
        `<div class="sub-zone" data-sub-zone="${esc(sz.id)}"${tintStyle(tints)}>` +
          `<span class="sub-zone-name">${esc(sz.displayName)}</span>`,
      );
      if (sz.badge !== null) {
        parts.push(
          `<span class="oval" data-oval="${esc(sz.id)}">` +
            `<em class="red">${sz.badge.red}</em>/<em class="yellow">${sz.badge.yellow}</em></span>`,
        );
      }
      for (const badge of sz.individualAlerts) {
        parts.push(
          `<span class="badge ${badge.icon} ${badge.color}" data-alert="${esc(badge.alertId)}"></span>`,
        );
      }
      parts.push("</div>");
    }
    parts.push("</section>");
  }
  parts.push("</main>");

  parts.push('<aside class="menu">');
  for (const entry of model.menu) {
    parts.push(
      `<div class="entry" data-alert="${esc(entry.alertId)}">` +
        `<span class="capsule"><i class="left" style="--capsule:${esc(entry.capsuleLeft)}"></i>` +
        `<i class="right ${esc(entry.capsuleRight)}"></i></span>` +
        `<span class="icon ${entry.icon}"></span>` +
        `<span class="text">${esc(entry.text)}</span></div>`,
    );
  }
  parts.push("</aside>");

  parts.push('<footer class="pipes">');
  for (const pipe of model.pipes) {
    parts.push(
      `<div class="pipe ${pipe.color}" data-pipe="${esc(pipe.id)}" data-from="${esc(pipe.from)}"` +
        ` data-to="${esc(pipe.to)}"><span class="outer" style="width:${pipe.availablePct}%">` +
        `<span class="inner" style="width:${pipe.currentPct}%"></span></span></div>`,
    );
  }
  parts.push("</footer>");

  for (const strip of model.strips) {
    parts.push(
      `<svg class="strip" data-mission="${esc(strip.missionId)}" data-path="${esc(
        strip.alertIds.join(">"),
      )}" style="--strip-color:${esc(strip.color)}"></svg>`,
    );
  }

  parts.push("</div>");
  return parts.join("\n");
}
