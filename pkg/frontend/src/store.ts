/** Client-side session state. Every number shown in the UI originates from a
 * server response; this store only decides which responses may be shown.
 *
 * Staleness rule: a layer response is rendered only when its version stamp is
 * at least the session's current version AND at least the version already on
 * screen. Selections replace the session (bumping the expected version)
 * before any refetch, so a slow layer fetch from before the selection can
 * never overwrite newer state.
 */

import {
  ApiError,
  type Cell,
  type Layer,
  type LayerGrid,
  NetworkError,
  type PlannerApi,
  type SessionState,
} from "./api";

export interface Notice {
  kind: "info" | "error" | "budget" | "retry";
  text: string;
}

export type Listener = () => void;

export class PlannerStore {
  session: SessionState | null = null;
  activeLayer: Layer = "comprehensive";
  layer: LayerGrid | null = null;
  hovered: Cell | null = null;
  notice: Notice | null = null;
  mutationInFlight = false;

  private listeners: Listener[] = [];

  constructor(private readonly api: PlannerApi) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((entry) => entry !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener();
    }
  }

  /** True while the displayed layer predates the session's latest mutation. */
  get layerIsStale(): boolean {
    return this.session !== null && this.layer !== null
      && this.layer.version < this.session.version;
  }

  get budgetExhausted(): boolean {
    return this.session !== null
      && this.session.budget.used >= this.session.budget.total;
  }

  async createSession(weights?: number[]): Promise<void> {
    this.session = await this.api.createSession(weights);
    this.layer = null;
    this.notice = null;
    this.emit();
    await this.refreshLayer();
  }

  /** Admit a layer response if and only if it is current. Returns whether it
   * was accepted; rejected responses leave the display untouched. */
  presentLayer(grid: LayerGrid): boolean {
    if (!this.session || grid.layer !== this.activeLayer) {
      return false;
    }
    if (grid.rows !== this.session.grid.rows || grid.cols !== this.session.grid.cols
        || grid.values.length !== grid.rows * grid.cols) {
      this.notice = { kind: "error", text: "layer shape does not match the session grid" };
      this.emit();
      return false;
    }
    if (grid.version < this.session.version) {
      return false; // fetched before the latest mutation
    }
    if (this.layer && this.layer.layer === grid.layer && grid.version < this.layer.version) {
      return false; // older than what is already on screen
    }
    this.layer = grid;
    this.emit();
    return true;
  }

  async refreshLayer(): Promise<void> {
    if (!this.session) {
      return;
    }
    const requested = this.activeLayer;
    try {
      const grid = await this.api.fetchLayer(this.session.id, requested);
      this.presentLayer(grid);
    } catch (err) {
      this.failSoftly(err);
    }
  }

  async setLayer(layer: Layer): Promise<void> {
    this.activeLayer = layer;
    if (this.layer && this.layer.layer !== layer) {
      this.layer = null; // legend and values must not show the old layer
    }
    this.emit();
    await this.refreshLayer();
  }

  setHovered(cell: Cell | null): void {
    this.hovered = cell;
    this.emit();
  }

  /** Place a site. Out-of-bounds clicks send nothing; budget exhaustion and
   * transport failures surface as notices without touching session state. */
  async select(cell: Cell): Promise<void> {
    if (!this.session || this.mutationInFlight) {
      return;
    }
    const { rows, cols } = this.session.grid;
    if (cell[0] < 0 || cell[0] >= rows || cell[1] < 0 || cell[1] >= cols) {
      return;
    }
    if (this.budgetExhausted) {
      this.notice = { kind: "budget", text: "site budget exhausted" };
      this.emit();
      return;
    }
    this.mutationInFlight = true;
    this.emit();
    try {
      const next = await this.api.select(this.session.id, cell);
      this.session = next;
      this.notice = null;
      this.emit();
      await this.refreshLayer();
    } catch (err) {
      this.failSoftly(err);
    } finally {
      this.mutationInFlight = false;
      this.emit();
    }
  }

  /** Override the synthesis weights. Non-finite values never leave the client. */
  async setWeights(weights: number[]): Promise<void> {
    if (!this.session || this.mutationInFlight) {
      return;
    }
    if (weights.length !== 4 || !weights.every(Number.isFinite)) {
      this.notice = { kind: "error", text: "weights must be 4 finite numbers" };
      this.emit();
      return;
    }
    this.mutationInFlight = true;
    this.emit();
    try {
      const next = await this.api.setWeights(this.session.id, weights);
      this.session = next;
      this.notice = null;
      this.emit();
      await this.refreshLayer();
    } catch (err) {
      this.failSoftly(err);
    } finally {
      this.mutationInFlight = false;
      this.emit();
    }
  }

  private failSoftly(err: unknown): void {
    if (err instanceof ApiError && err.status === 409) {
      this.notice = { kind: "budget", text: err.message };
    } else if (err instanceof NetworkError) {
      this.notice = { kind: "retry", text: `request failed, retry: ${err.message}` };
    } else if (err instanceof ApiError) {
      this.notice = { kind: "error", text: `${err.code}: ${err.message}` };
    } else {
      this.notice = { kind: "error", text: String(err) };
    }
    this.emit();
  }
}
