// Layered left-to-right layout: one column per node in id order, one lane
// per live branch. The first child (by id) inherits its parent's lane;
// later children open new lanes; a merge closes its second parent's lane.

export interface LayoutNode {
  id: number;
  parents: number[];
}

export interface Placement {
  col: number;
  lane: number;
}

export interface DagLayout {
  positions: Map<number, Placement>;
  edges: Array<[number, number]>;
  laneCount: number;
}

export function computeLayout(nodes: LayoutNode[]): DagLayout {
  const ordered = [...nodes].sort((a, b) => a.id - b.id);
  const positions = new Map<number, Placement>();
  const edges: Array<[number, number]>= [];
  // lane -> id of the node currently ending that lane (undefined = free)
  const laneTips: Array<number | undefined> = [];

  const takeLaneOf = (parentId: number): number | undefined => {
    const lane = laneTips.indexOf(parentId);
    return lane === -1 ? undefined : lane;
  };

  const allocateLane = (): number => {
    const free = laneTips.indexOf(undefined);
    if (free !== -1) return free;
    laneTips.push(undefined);
    return laneTips.length - 1;
  };

  ordered.forEach((node, col) => {
    for (const p of node.parents) edges.push([p, node.id]);
    let lane: number;
    if (node.parents.length === 0) {
      lane = allocateLane();
    } else {
      const inherited = takeLaneOf(node.parents[0]);
      lane = inherited ?? allocateLane();
      // a merge absorbs its other parents' lanes
      for (const p of node.parents.slice(1)) {
        const other = takeLaneOf(p);
        if (other !== undefined) laneTips[other] = undefined;
      }
    }
    laneTips[lane] = node.id;
    positions.set(node.id, { col, lane });
  });

  return { positions, edges, laneCount: laneTips.length };
}
