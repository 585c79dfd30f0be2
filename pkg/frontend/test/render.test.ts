import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";
import {
  BoardReplica,
  Topology,
  buildRenderModel,
  renderHtml,
  type DeltaRecord,
  type RenderModel,
  type SnapshotRecord,
  type TopologyDoc,
} from "../src/index.js";

function loadJson<T>(name: string): T {
  return JSON.parse(readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf-8")) as T;
}

function loadStream(name: string): DeltaRecord[] {
  return readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf-8")
    .split("\n")
    .filter((line) => line.trim().length > 0)
    .map((line) => JSON.parse(line) as DeltaRecord);
}

const topologyDoc = loadJson<TopologyDoc>("topology.json");
const bostonStream = loadStream("boston_ui.ndjson");
const finalSnapshot = loadJson<SnapshotRecord>("snapshot_final.json");

/** Replay the walkthrough stream up to and including `seq`, then render. */
function modelAt(seq: number, tick = 0): RenderModel {
  const replica = new BoardReplica(new Topology(topologyDoc));
  for (const record of bostonStream) {
    if (record.seq > seq) break;
    replica.applyDelta(record);
  }
  return buildRenderModel(replica, { tick });
}

function subZone(model: RenderModel, id: string) {
  for (const zone of model.zones) {
    const found = zone.subZones.find((sz) => sz.id === id);
    if (found) return found;
  }
  throw new Error(`sub-zone ${id} not in model`);
}

const VTC_COLOR = "#2a6fbb";
const VTC_SUB_ZONES = ["boston", "london", "melbourne", "sydney", "tokyo", "vpn_users"];

describe("walkthrough panel at seq 14", () => {
  const model = modelAt(14);

  it("shows the (9, 1) oval on the Boston sub-zone", () => {
    expect(subZone(model, "boston").badge).toEqual({ red: 9, yellow: 1 });
  });

  it("shows the degraded flow pipe between the VPN and Sydney", () => {
    expect(model.pipes).toHaveLength(1);
    expect(model.pipes[0]).toEqual({
      id: "pipe-1",
      from: "vpn_users",
      to: "sydney",
      color: "red",
      availablePct: 55,
      currentPct: 30,
    });
  });

  it("marks mission-relevant alerts individually", () => {
    expect(subZone(model, "sydney").individualAlerts).toEqual([
      { alertId: "syd-vc-outage", icon: "heart", color: "red" },
    ]);
    expect(subZone(model, "boston").individualAlerts.map((a) => a.alertId)).toEqual([
      "bos-incident-08",
      "bos-incident-09",
    ]);
  });

  it("threads the mission strip through the dependency alerts", () => {
    expect(model.strips).toEqual([
      {
        missionId: "vtc_voip",
        color: VTC_COLOR,
        alertIds: ["pipe-1.alert", "bos-incident-08", "bos-incident-09", "syd-vc-outage"],
      },
    ]);
  });

  it("stamps seq, digest, and the journal clock", () => {
    expect(model.seq).toBe(14);
    expect(model.digest).toBe(bostonStream[13].digest);
    expect(model.clock).toBe("2013-01-01T00:00:13.000Z");
  });
});

describe("mission activation side effects (seq 16 vs 17)", () => {
  const before = modelAt(16); // vtc_voip deactivated
  const after = modelAt(17); // vtc_voip re-activated by the Manager

  it("turns the mission tab solid", () => {
    const tabBefore = before.missionTabs.find((t) => t.id === "vtc_voip")!;
    const tabAfter = after.missionTabs.find((t) => t.id === "vtc_voip")!;
    expect(tabBefore.solid).toBe(false);
    expect(tabAfter.solid).toBe(true);
  });

  it("tints exactly the mission dependency sub-zones", () => {
    for (const id of VTC_SUB_ZONES) {
      expect(subZone(before, id).missionTints).toEqual([]);
      expect(subZone(after, id).missionTints).toEqual([VTC_COLOR]);
    }
    for (const zone of after.zones) {
      for (const sz of zone.subZones) {
        if (!VTC_SUB_ZONES.includes(sz.id)) {
          expect(sz.missionTints).toEqual([]);
        }
      }
    }
  });

  it("hides pipes unrelated to the active mission", () => {
    expect(before.pipes.map((p) => p.id)).toEqual(["pipe-1", "pipe-2"]);
    expect(after.pipes.map((p) => p.id)).toEqual(["pipe-1"]);
  });

  it("reorders the menu to put mission-impact alerts first", () => {
    const perfBefore = before.menu.filter((e) => e.category === "performance");
    const perfAfter = after.menu.filter((e) => e.category === "performance");
    expect(perfBefore.map((e) => e.alertId)).toEqual([
      "pipe-2.alert",
      "pipe-1.alert",
      "bos-incident-07",
    ]);
    expect(perfAfter.map((e) => e.alertId)).toEqual([
      "pipe-1.alert",
      "pipe-2.alert",
      "bos-incident-07",
    ]);
  });

  it("shows the mission strip only while the mission is active", () => {
    expect(before.strips).toEqual([]);
    expect(after.strips.map((s) => s.missionId)).toEqual(["vtc_voip"]);
  });

  it("colors menu capsules by primary mission", () => {
    const entry = after.menu.find((e) => e.alertId === "pipe-1.alert")!;
    expect(entry.capsuleLeft).toBe(VTC_COLOR);
    expect(entry.capsuleRight).toBe("red");
    const neutral = after.menu.find((e) => e.alertId === "bos-incident-07")!;
    expect(neutral.capsuleLeft).toBe("neutral");
  });
});

describe("member authorization surface (seq 18)", () => {
  it("a rejected view-control command changes nothing but the sequence number", () => {
    const rejection = bostonStream[17];
    expect(rejection.outcome.accepted).toBe(false);
    expect(rejection.outcome.reason_code).toBe("authorization");
    expect(rejection.command.issuer.role).toBe("member");

    const { seq: seq17, ...board17 } = modelAt(17);
    const { seq: seq18, ...board18 } = modelAt(18);
    expect(seq17).toBe(17);
    expect(seq18).toBe(18);
    expect(board18).toEqual(board17); // digest, zones, tabs, pipes, menu, clock
  });
});

describe("menu scroll window", () => {
  it("rotates oversized categories one entry per tick", () => {
    // Six health alerts at seq 14, window of four.
    const healthIds = (tick: number) =>
      modelAt(14, tick)
        .menu.filter((e) => e.category === "health")
        .map((e) => e.alertId);
    expect(healthIds(0)).toEqual([
      "syd-vc-outage",
      "bos-incident-09",
      "bos-incident-08",
      "bos-incident-06",
    ]);
    expect(healthIds(1)).toEqual([
      "bos-incident-09",
      "bos-incident-08",
      "bos-incident-06",
      "bos-incident-04",
    ]);
    expect(healthIds(4)).toEqual([
      "bos-incident-04",
      "bos-incident-02",
      "syd-vc-outage",
      "bos-incident-09",
    ]);
    expect(healthIds(6)).toEqual(healthIds(0)); // full cycle
  });

  it("shows small categories whole, without rotation", () => {
    const perf = (tick: number) =>
      modelAt(14, tick)
        .menu.filter((e) => e.category === "performance")
        .map((e) => e.alertId);
    expect(perf(0)).toEqual(["pipe-1.alert", "bos-incident-07"]);
    expect(perf(3)).toEqual(perf(0));
  });

  it("counts category totals before windowing", () => {
    const model = modelAt(14);
    expect(model.menuTotals).toEqual({ health: 6, security: 4, performance: 2 });
  });
});

describe("query overlays on the final walkthrough state", () => {
  const replica = BoardReplica.fromSnapshot(finalSnapshot);
  const model = buildRenderModel(replica);

  it("renders active query tabs solid, in id order", () => {
    const tabs = model.queryTabs;
    expect(tabs.map((t) => t.id)).toEqual([
      "q-aus",
      "q-cidr",
      "q-esc",
      "q-f",
      "q-g",
      "q-h",
      "q-host",
      "q-i",
      "q-java",
    ]);
    expect(tabs.find((t) => t.id === "q-aus")!.solid).toBe(false); // deactivated
    expect(tabs.find((t) => t.id === "q-i")!.solid).toBe(false); // blocked by the cap
    expect(tabs.find((t) => t.id === "q-java")!.solid).toBe(true);
    expect(tabs.find((t) => t.id === "q-java")!.label).toBe("Unpatched Java v2"); // upsert
  });

  it("tints sub-zones whose assets match active queries, in activation order", () => {
    // Active order: q-java, q-cidr, q-esc, q-host, q-f, q-g, q-h.
    expect(subZone(model, "boston").queryTints).toEqual(["#16a085", "#7f8c8d", "#2980b9"]);
    expect(subZone(model, "tokyo").queryTints).toEqual(["#16a085", "#7f8c8d", "#e67e22"]);
    expect(subZone(model, "net_defense").queryTints).toEqual([]);
  });

  it("threads the strip through an alert on a gone-but-referenced pipe", () => {
    expect(model.strips).toEqual([
      { missionId: "vtc_voip", color: VTC_COLOR, alertIds: ["watch-pipe-1"] },
    ]);
    expect(model.pipes).toEqual([]); // pipe-2 is unrelated to the active mission
  });

  it("keeps menu totals for all live alerts", () => {
    expect(model.menuTotals).toEqual({ health: 2, security: 1, performance: 2 });
  });
});

describe("static HTML export", () => {
  const model = modelAt(17);
  const html = renderHtml(model);

  it("is anchored to the replica position", () => {
    expect(html).toContain(`data-seq="17"`);
    expect(html).toContain(`data-digest="${model.digest}"`);
  });

  it("renders the Boston oval, tabs, pipes, and strip", () => {
    expect(html).toContain('data-oval="boston"');
    expect(html).toContain('<em class="red">9</em>/<em class="yellow">1</em>');
    expect(html).toContain('class="tab mission solid" data-mission="vtc_voip"');
    expect(html).toContain('class="tab mission hollow" data-mission="b_docs"');
    expect(html).toContain('data-pipe="pipe-1" data-from="vpn_users" data-to="sydney"');
    expect(html).toContain(
      'data-path="pipe-1.alert&gt;bos-incident-08&gt;bos-incident-09&gt;syd-vc-outage"',
    );
  });

  it("escapes text content", () => {
    expect(html).not.toContain("[object Object]");
    const opens = (html.match(/<div/g) ?? []).length;
    const closes = (html.match(/<\/div>/g) ?? []).length;
    expect(opens).toBe(closes);
  });

  it("renders a clean empty board", () => {
    const empty = buildRenderModel(new BoardReplica(new Topology(topologyDoc)));
    expect(empty.seq).toBe(0);
    expect(empty.clock).toBe("");
    expect(empty.pipes).toEqual([]);
    expect(empty.menu).toEqual([]);
    const emptyHtml = renderHtml(empty);
    expect(emptyHtml).toContain('data-seq="0"');
    expect(emptyHtml).not.toContain("data-oval");
  });
});
