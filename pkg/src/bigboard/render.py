"""Board rendering: a delimited text snapshot and an SVG wall-board figure.

The text form is one record per line with single-space-separated fields,
which makes it grep- and awk-friendly (``boston 9 1`` is a badge row). The
SVG form draws the full board with matplotlib: zone columns, sub-zone
panels, aggregate and individual badges, mission/query highlights, flow
pipes, the red strip, and the scrolling warning menu.

SVG output is byte-deterministic for a given state: the Agg backend, a
fixed hash salt, text kept as text, and no embedded creation date.
"""

from __future__ import annotations

from pathlib import Path

from .alerts import AlertStatus, SubjectKind, aggregate_badges, subject_sub_zone
from .overlay import NEUTRAL_CAPSULE, menu_window
from .pipes import pipe_color
from .state import BoardState

_STATUS_GLYPH = {"health": "H", "security": "S", "performance": "P"}
_FLAG_RGB = {"red": "#c62828", "yellow": "#f3b300"}


def render_text(state: BoardState, seq: int) -> str:
    """Single-space-delimited snapshot: badges, pipes, alerts, view."""
    topology = state.topology
    live = state.alerts.live_alerts()
    alerts_by_id = {a.id: a for a in live}
    lines = [
        f"network {topology.network_name} seq {seq} digest {state.digest()}",
        "missions " + (" ".join(state.view.active_missions) or "-"),
        "queries " + (" ".join(state.view.active_queries) or "-"),
        "badges",
    ]
    for badge in aggregate_badges(live, topology):
        lines.append(f"{badge.sub_zone_id} {badge.red_count} {badge.yellow_count}")
    lines.append("pipes")
    for pipe in sorted(state.pipes.live_pipes(), key=lambda p: p.id):
        color = pipe_color(pipe, alerts_by_id).value
        lines.append(
            f"{pipe.id} {pipe.endpoint_a} {pipe.endpoint_b} "
            f"{pipe.available_bp} {pipe.current_bp} {color}"
        )
    lines.append("alerts")
    for alert in sorted(live, key=lambda a: a.id):
        lines.append(
            f"{alert.id} {alert.status.value} {alert.category.value} "
            f"{alert.subject.kind.value} {alert.subject.ref} "
            f"{alert.primary_mission or '-'}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# SVG board


def _panel_geometry(topology):
    """(x, y, w, h) of each sub-zone panel plus each zone's column box."""
    zones = sorted(topology.zones, key=lambda z: z.layout_rank)
    columns = {}
    panels = {}
    width = 96.0 / max(len(zones), 1)
    for zi, zone in enumerate(zones):
        x = 2.0 + zi * width
        columns[zone.id] = (x, width - 1.5)
        for sub_zone in sorted(zone.sub_zones, key=lambda s: s.layout_rank):
            y = 44.0 - (sub_zone.layout_rank - 1) * 7.0
            panels[sub_zone.id] = (x, y, width - 1.5, 5.4)
    return zones, columns, panels


def _panel_center(panels, sub_zone_id):
    x, y, w, h = panels[sub_zone_id]
    return (x + w / 2.0, y + h / 2.0)


def render_board_svg(
    state: BoardState,
    seq: int,
    out_path: str | Path,
    tick: int = 0,
    window_size: int = 4,
) -> None:
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt
    from matplotlib.lines import Line2D
    from matplotlib.patches import FancyBboxPatch, Rectangle

    plt.rcParams["svg.fonttype"] = "none"
    plt.rcParams["svg.hashsalt"] = "bigboard"
    plt.rcParams["font.family"] = "DejaVu Sans"

    topology = state.topology
    layers = state.layers()
    live = state.alerts.live_alerts()
    alerts_by_id = {a.id: a for a in live}
    badges = {b.sub_zone_id: b for b in aggregate_badges(live, topology)}
    zones, columns, panels = _panel_geometry(topology)
    endpoint_map = state.pipes.endpoint_map

    fig, ax = plt.subplots(figsize=(16, 9))
    ax.set_xlim(0, 100)
    ax.set_ylim(0, 56)
    ax.axis("off")
    fig.subplots_adjust(left=0, right=1, top=1, bottom=0)

    ax.text(
        2, 53.5,
        f"{topology.network_name}  seq {seq}  digest {state.digest()[:12]}",
        fontsize=13, fontweight="bold", color="#1a1a1a",
    )

    # Flow pipes go underneath the panels.
    for pid in layers.visible_pipes:
        pipe = state.pipes.get(pid)
        (x1, y1) = _panel_center(panels, pipe.endpoint_a)
        (x2, y2) = _panel_center(panels, pipe.endpoint_b)
        color = _FLAG_RGB[pipe_color(pipe, alerts_by_id).value]
        ax.add_line(Line2D(
            [x1, x2], [y1, y2],
            linewidth=1.0 + 7.0 * pipe.available_bp / 10000,
            color="#b9c2cc", zorder=1, solid_capstyle="round",
        ))
        ax.add_line(Line2D(
            [x1, x2], [y1, y2],
            linewidth=0.6 + 6.0 * pipe.current_bp / 10000,
            color=color, zorder=2, solid_capstyle="round", alpha=0.85,
        ))
        ax.text(
            (x1 + x2) / 2, (y1 + y2) / 2 + 0.9, pid,
            fontsize=6.5, ha="center", color=color, zorder=3,
        )

    # Zone columns and sub-zone panels.
    for zone in zones:
        x, w = columns[zone.id]
        ax.text(x + w / 2, 50.8, zone.display_name, fontsize=11,
                ha="center", color="#333333", fontweight="bold")
        for sub_zone in zone.sub_zones:
            px, py, pw, ph = panels[sub_zone.id]
            ax.add_patch(FancyBboxPatch(
                (px, py), pw, ph,
                boxstyle="round,pad=0.15",
                facecolor="#f4f6f8", edgecolor="#555f6a", linewidth=1.1, zorder=4,
            ))
            ax.text(px + 0.6, py + ph - 1.3, sub_zone.display_name,
                    fontsize=8.5, color="#222222", zorder=6)

            # Mission highlight rings, one inset ring per active mission.
            for mi, mid in enumerate(state.view.active_missions):
                if sub_zone.id in layers.mission_highlights.get(mid, ()):
                    pad = 0.45 + 0.35 * mi
                    ax.add_patch(Rectangle(
                        (px - pad, py - pad), pw + 2 * pad, ph + 2 * pad,
                        facecolor="none", zorder=3,
                        edgecolor=topology.missions_by_id[mid].color, linewidth=1.6,
                    ))

            # Query hit markers along the panel's lower-left edge.
            qi = 0
            for qid in state.view.active_queries:
                highlight = layers.query_highlights.get(qid)
                if highlight and sub_zone.id in highlight.sub_zone_ids:
                    count = len(highlight.asset_ids & sub_zone.asset_ids)
                    ax.text(
                        px + 0.7 + qi * 2.6, py + 0.55, f"●{count}",
                        fontsize=7, color=state.queries[qid].color, zorder=6,
                    )
                    qi += 1

            badge = badges.get(sub_zone.id)
            if badge is not None:
                bx = px + pw - 1.4
                if badge.red_count:
                    ax.text(bx, py + ph - 1.2, str(badge.red_count),
                            fontsize=8.5, ha="center", color="white", zorder=7,
                            bbox={"boxstyle": "circle,pad=0.25",
                                  "facecolor": _FLAG_RGB["red"], "edgecolor": "none"})
                if badge.yellow_count:
                    ax.text(bx - 2.4, py + ph - 1.2, str(badge.yellow_count),
                            fontsize=8.5, ha="center", color="#1a1a1a", zorder=7,
                            bbox={"boxstyle": "circle,pad=0.25",
                                  "facecolor": _FLAG_RGB["yellow"], "edgecolor": "none"})

    # Individual badges: per-alert glyphs on the owning panel.
    slots: dict[str, int] = {}
    for alert_id in sorted(layers.individual_badges):
        alert = alerts_by_id[alert_id]
        if alert.subject.kind is SubjectKind.PIPE:
            a, b = endpoint_map[alert.subject.ref]
            home = min(a, b, key=lambda s: topology.layout_key(s))
        else:
            home = subject_sub_zone(alert.subject, topology)
        px, py, pw, ph = panels[home]
        slot = slots.get(home, 0)
        slots[home] = slot + 1
        flag = alert.status.flag_color or "red"
        ax.text(
            px + 0.9 + slot * 1.9, py + 2.0,
            _STATUS_GLYPH[alert.category.value],
            fontsize=7.5, ha="center", color="white", zorder=8,
            bbox={"boxstyle": "round,pad=0.2",
                  "facecolor": _FLAG_RGB[flag], "edgecolor": "#333333", "linewidth": 0.5},
        )

    # The red strip: a sweep through every unassigned mission-impacting
    # problem, drawn per active mission in board order.
    for mi, mid in enumerate(state.view.active_missions):
        path = layers.strip.get(mid, ())
        if len(path) < 1:
            continue
        points = []
        for alert_id in path:
            alert = alerts_by_id[alert_id]
            if alert.subject.kind is SubjectKind.PIPE:
                a, b = endpoint_map[alert.subject.ref]
                home = min(a, b, key=lambda s: topology.layout_key(s))
            else:
                home = subject_sub_zone(alert.subject, topology)
            cx, cy = _panel_center(panels, home)
            points.append((cx, cy - 1.2 - 0.5 * mi))
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        ax.add_line(Line2D(xs, ys, linewidth=2.2, color=_FLAG_RGB["red"],
                           zorder=9, alpha=0.75, marker="o", markersize=4))

    # Warning menu window along the bottom, three category lanes.
    visible = menu_window(list(layers.menu), window_size, tick)
    ax.add_line(Line2D([2, 98], [8.4, 8.4], linewidth=0.8, color="#888888"))
    ax.text(2, 7.4, f"warnings (tick {tick})", fontsize=8, color="#333333")
    lanes = {"health": 2.0, "security": 35.0, "performance": 68.0}
    lane_rows: dict[str, int] = {"health": 0, "security": 0, "performance": 0}
    for entry in visible:
        lane = entry.category.value
        row = lane_rows[lane]
        lane_rows[lane] = row + 1
        y = 6.2 - row * 1.55
        x = lanes[lane]
        left = entry.capsule_left
        ax.add_patch(Rectangle(
            (x, y - 0.35), 0.9, 1.0, zorder=6,
            facecolor="#d0d4d9" if left == NEUTRAL_CAPSULE else left,
            edgecolor="none",
        ))
        ax.add_patch(Rectangle(
            (x + 1.1, y - 0.35), 0.9, 1.0, zorder=6,
            facecolor=_FLAG_RGB[entry.capsule_right], edgecolor="none",
        ))
        text = entry.text if len(entry.text) <= 44 else entry.text[:43] + "…"
        ax.text(x + 2.4, y - 0.15,
                f"{_STATUS_GLYPH[lane]} {entry.alert_id}: {text}",
                fontsize=7, color="#1a1a1a", zorder=6)

    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
