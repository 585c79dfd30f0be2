/**
 * Immutable network inventory as served in snapshots.
 *
 * The console never edits topology; it receives the full document from
 * the server and indexes it for layout, query evaluation, and mission
 * classification. The topology digest is the SHA-256 of the document's
 * canonical encoding and is embedded in every state digest, so both
 * sides must agree on the document byte for byte.
 */

import { canonicalDigest, type CanonicalValue } from "./canonical.js";
import { ValidationError } from "./errors.js";

export interface AssetDoc {
  id: string;
  hostname: string;
  sub_zone_id: string;
  geo_tags: string[];
  function_tags: string[];
  addresses: string[];
}

export interface SubZoneDoc {
  id: string;
  display_name: string;
  kind: string;
  layout_rank: number;
  asset_ids: string[];
  assets: AssetDoc[];
}

export interface ZoneDoc {
  id: string;
  display_name: string;
  layout_rank: number;
  sub_zones: SubZoneDoc[];
}

export interface MissionDoc {
  id: string;
  display_name: string;
  color: string;
  rank: number;
  dependency_asset_ids: string[];
}

export interface TopologyDoc {
  network_name: string;
  schema_version: number;
  zones: ZoneDoc[];
  missions: MissionDoc[];
}

/** Parse a dotted-quad IPv4 address into its 32-bit integer value. */
export function ipv4ToInt(text: string): number {
  const parts = text.split(".");
  if (parts.length !== 4) {
    throw new ValidationError(`expected 4 octets in '${text}'`);
  }
  let value = 0;
  for (const part of parts) {
    if (!/^[0-9]{1,3}$/.test(part)) {
      throw new ValidationError(`bad octet '${part}' in '${text}'`);
    }
    if (part.length > 1 && part[0] === "0") {
      throw new ValidationError(`leading zeros in octet '${part}' of '${text}'`);
    }
    const octet = Number(part);
    if (octet > 255) {
      throw new ValidationError(`octet '${part}' out of range in '${text}'`);
    }
    value = value * 256 + octet;
  }
  return value;
}

export function intToIpv4(value: number): string {
  return [
    Math.floor(value / 16777216) % 256,
    Math.floor(value / 65536) % 256,
    Math.floor(value / 256) % 256,
    value % 256,
  ].join(".");
}

export class Topology {
  readonly doc: TopologyDoc;
  readonly digest: string;
  readonly networkName: string;
  readonly assetsById = new Map<string, AssetDoc>();
  readonly subZonesById = new Map<string, SubZoneDoc>();
  readonly zoneOfSubZone = new Map<string, ZoneDoc>();
  readonly missions: MissionDoc[];
  readonly missionsById = new Map<string, MissionDoc>();
  /** Missions sorted by rank, the classification precedence order. */
  readonly missionsByRank: MissionDoc[];
  readonly allAssetIds = new Set<string>();
  readonly subZoneAssetIds = new Map<string, Set<string>>();
  readonly dependencySets = new Map<string, Set<string>>();
  readonly geoTagsLower = new Map<string, Set<string>>();
  readonly functionTagsLower = new Map<string, Set<string>>();
  readonly addressInts = new Map<string, number[]>();
  /** Shared memo for atom evaluation; queries repeat atoms constantly. */
  readonly atomCache = new Map<string, Set<string>>();

  constructor(doc: TopologyDoc) {
    this.doc = doc;
    this.digest = canonicalDigest(doc as unknown as CanonicalValue);
    this.networkName = doc.network_name;
    for (const zone of doc.zones) {
      for (const sz of zone.sub_zones) {
        if (this.subZonesById.has(sz.id)) {
          throw new ValidationError(`duplicate sub-zone id '${sz.id}'`);
        }
        this.subZonesById.set(sz.id, sz);
        this.zoneOfSubZone.set(sz.id, zone);
        const ids = new Set<string>();
        for (const asset of sz.assets) {
          if (this.assetsById.has(asset.id)) {
            throw new ValidationError(`duplicate asset id '${asset.id}'`);
          }
          this.assetsById.set(asset.id, asset);
          this.allAssetIds.add(asset.id);
          ids.add(asset.id);
          this.geoTagsLower.set(asset.id, new Set(asset.geo_tags.map((t) => t.toLowerCase())));
          this.functionTagsLower.set(
            asset.id,
            new Set(asset.function_tags.map((t) => t.toLowerCase())),
          );
          this.addressInts.set(
            asset.id,
            [...asset.addresses].sort().map((a) => ipv4ToInt(a)),
          );
        }
        this.subZoneAssetIds.set(sz.id, ids);
      }
    }
    this.missions = doc.missions;
    for (const mission of doc.missions) {
      this.missionsById.set(mission.id, mission);
      const deps = new Set<string>();
      for (const aid of mission.dependency_asset_ids) {
        if (!this.allAssetIds.has(aid)) {
          throw new ValidationError(`mission '${mission.id}' depends on unknown asset '${aid}'`);
        }
        deps.add(aid);
      }
      this.dependencySets.set(mission.id, deps);
    }
    this.missionsByRank = [...doc.missions].sort((a, b) => a.rank - b.rank);
  }

  /** (zone rank, sub-zone rank): the left-to-right panel position. */
  layoutKey(subZoneId: string): [number, number] {
    const sz = this.subZonesById.get(subZoneId);
    if (sz === undefined) {
      throw new ValidationError(`unknown sub-zone '${subZoneId}'`);
    }
    return [this.zoneOfSubZone.get(subZoneId)!.layout_rank, sz.layout_rank];
  }

  /** Sub-zones containing at least one of the given assets. */
  subzonesTouching(assetIds: Iterable<string>): Set<string> {
    const out = new Set<string>();
    for (const aid of assetIds) {
      const asset = this.assetsById.get(aid);
      if (asset === undefined) {
        throw new ValidationError(`unknown asset '${aid}'`);
      }
      out.add(asset.sub_zone_id);
    }
    return out;
  }
}
