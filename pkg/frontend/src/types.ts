// JSON shapes served by the local project API.

export interface NodePayload {
  id: number;
  kind: string;
  summary: string;
  author: string;
  timestamp: string;
  note: string;
  parents: number[];
  thumbnail: string;
  image: string;
  // present on the node-details endpoint only
  width?: number;
  height?: number;
  children?: number[];
  params?: Record<string, string>;
}

export interface DagPayload {
  project: string;
  nodes: NodePayload[];
  heads: number[];
}

export interface DiffStep {
  id: number;
  kind: string;
  summary: string;
}

export interface PixelDelta {
  count: number;
  width: number;
  height: number;
  rle: number[];
}

export interface DiffPayload {
  src: number;
  dst: number;
  steps: DiffStep[];
  frames: number;
  pixel_delta: PixelDelta | null;
}

export interface MergePayload {
  node: number;
  base: number;
  left: number;
  right: number;
  conflict_count: number;
}

export interface PullPayload {
  status: string;
  local_heads: number[];
  remote_heads: number[];
  new_nodes: number[];
}
