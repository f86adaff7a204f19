/** DOM wiring: everything renders from the store, the store talks to the API.
 * No score arithmetic happens here; cells, values, weights, and budgets are
 * displayed exactly as the server sent them.
 */

import { LAYERS, type PlannerApi } from "./api";
import { cssColor, legendStops } from "./colormap";
import { cellAt, drawHeatmap, rasterize, valueAt } from "./heatmap";
import { PlannerStore } from "./store";

const WEIGHT_NAMES = ["demand", "coverage", "connectivity", "cost"];
const WEIGHT_MIN = -2;
const WEIGHT_MAX = 2;

export function mountApp(root: HTMLElement, api: PlannerApi): PlannerStore {
  const store = new PlannerStore(api);
  root.innerHTML = `
    <header>
      <h1>vertiplan</h1>
      <button id="new-session">New session</button>
      <span id="budget"></span>
      <span id="stale" class="stale" hidden>refreshing…</span>
    </header>
    <div id="notice" hidden></div>
    <main>
      <section class="map">
        <nav id="layers"></nav>
        <canvas id="heatmap" width="600" height="600"></canvas>
        <div id="tooltip" hidden></div>
        <div id="legend"></div>
      </section>
      <aside>
        <h2>Weights</h2>
        <div id="sliders"></div>
        <h2>Recommendations</h2>
        <ol id="recommendations"></ol>
        <h2>Optimize</h2>
        <button id="run-optimize">Run 50 iterations</button>
        <canvas id="loss-curve" width="260" height="120" hidden></canvas>
        <div id="job-status"></div>
      </aside>
    </main>
  `;

  const canvas = root.querySelector<HTMLCanvasElement>("#heatmap")!;
  const tooltip = root.querySelector<HTMLDivElement>("#tooltip")!;
  const noticeBox = root.querySelector<HTMLDivElement>("#notice")!;
  const layerNav = root.querySelector<HTMLElement>("#layers")!;
  const legendBox = root.querySelector<HTMLDivElement>("#legend")!;
  const sliderBox = root.querySelector<HTMLDivElement>("#sliders")!;
  const recList = root.querySelector<HTMLOListElement>("#recommendations")!;
  const budgetBox = root.querySelector<HTMLSpanElement>("#budget")!;
  const staleBadge = root.querySelector<HTMLSpanElement>("#stale")!;

  for (const layer of LAYERS) {
    const button = document.createElement("button");
    button.textContent = layer;
    button.dataset.layer = layer;
    button.addEventListener("click", () => void store.setLayer(layer));
    layerNav.appendChild(button);
  }

  for (const { value, color } of legendStops(6)) {
    const entry = document.createElement("span");
    entry.className = "legend-entry";
    entry.innerHTML = `<i style="background:${cssColor(color)}"></i>${value.toFixed(1)}`;
    legendBox.appendChild(entry);
  }

  WEIGHT_NAMES.forEach((name, index) => {
    const row = document.createElement("label");
    row.innerHTML = `
      <span>${name}</span>
      <input type="range" min="${WEIGHT_MIN}" max="${WEIGHT_MAX}" step="0.05" data-weight="${index}">
      <output>0.00</output>
    `;
    sliderBox.appendChild(row);
  });
  sliderBox.addEventListener("change", () => {
    const weights = sliderValues();
    if (weights) {
      void store.setWeights(weights);
    }
  });

  function sliderValues(): number[] | null {
    const inputs = [...sliderBox.querySelectorAll<HTMLInputElement>("input[data-weight]")];
    const values = inputs.map((input) => Number.parseFloat(input.value));
    return values.every(Number.isFinite) ? values : null;
  }

  root.querySelector("#new-session")!.addEventListener("click", () => {
    void store.createSession();
  });

  canvas.addEventListener("mousemove", (event) => {
    if (!store.session || !store.layer) {
      return;
    }
    const bounds = canvas.getBoundingClientRect();
    const cell = cellAt(
      event.clientX - bounds.left,
      event.clientY - bounds.top,
      bounds.width,
      bounds.height,
      store.session.grid.rows,
      store.session.grid.cols,
    );
    store.setHovered(cell);
  });
  canvas.addEventListener("mouseleave", () => store.setHovered(null));
  canvas.addEventListener("click", (event) => {
    if (!store.session) {
      return;
    }
    const bounds = canvas.getBoundingClientRect();
    const cell = cellAt(
      event.clientX - bounds.left,
      event.clientY - bounds.top,
      bounds.width,
      bounds.height,
      store.session.grid.rows,
      store.session.grid.cols,
    );
    if (cell) {
      void store.select(cell);
    }
  });

  const jobStatusBox = root.querySelector<HTMLDivElement>("#job-status")!;
  const lossCanvas = root.querySelector<HTMLCanvasElement>("#loss-curve")!;
  root.querySelector("#run-optimize")!.addEventListener("click", () => {
    void runOptimizeJob();
  });

  async function runOptimizeJob(): Promise<void> {
    jobStatusBox.textContent = "submitting…";
    try {
      const { job } = await api.submitOptimize({ iterations: 50, seed: 0 });
      let status = await api.jobStatus(job);
      while (status.status === "queued" || status.status === "running") {
        await new Promise((resolve) => setTimeout(resolve, 500));
        status = await api.jobStatus(job);
      }
      if (status.status === "done" && status.loss_history) {
        jobStatusBox.textContent =
          `done: loss ${status.loss_history[0]?.[1]} -> ` +
          `${Math.min(...status.loss_history.map(([, loss]) => loss))}`;
        drawLossCurve(lossCanvas, status.loss_history);
        lossCanvas.hidden = false;
      } else {
        jobStatusBox.textContent = `failed: ${status.error ?? "unknown"}`;
      }
    } catch (err) {
      jobStatusBox.textContent = `job error: ${err instanceof Error ? err.message : err}`;
    }
  }

  store.subscribe(() => render());
  render();

  function render(): void {
    const { session, layer, notice, hovered } = store;

    noticeBox.hidden = notice === null;
    if (notice) {
      noticeBox.textContent = notice.text;
      noticeBox.className = `notice-${notice.kind}`;
    }

    budgetBox.textContent = session
      ? `sites ${session.budget.used} / ${session.budget.total}`
      : "no session";
    staleBadge.hidden = !store.layerIsStale;

    for (const button of layerNav.querySelectorAll<HTMLButtonElement>("button")) {
      button.classList.toggle("active", button.dataset.layer === store.activeLayer);
      button.disabled = session === null;
    }

    const sliderRows = sliderBox.querySelectorAll<HTMLLabelElement>("label");
    sliderRows.forEach((row, index) => {
      const input = row.querySelector<HTMLInputElement>("input")!;
      const output = row.querySelector<HTMLOutputElement>("output")!;
      input.disabled = session === null || store.mutationInFlight;
      if (session && document.activeElement !== input) {
        input.value = String(session.weights[index]);
        output.textContent = session.weights[index]!.toFixed(2);
      }
    });

    recList.replaceChildren();
    if (session) {
      for (const { cell, score } of session.recommendations) {
        const item = document.createElement("li");
        const pick = document.createElement("button");
        pick.textContent = `(${cell[0]}, ${cell[1]}) score ${score.toFixed(3)}`;
        pick.disabled = store.mutationInFlight || store.budgetExhausted;
        pick.addEventListener("click", () => void store.select(cell));
        item.appendChild(pick);
        recList.appendChild(item);
      }
    }

    if (session && layer) {
      try {
        drawHeatmap(canvas, rasterize(layer.values, layer.rows, layer.cols), session.plan.cells);
      } catch (err) {
        noticeBox.hidden = false;
        noticeBox.textContent = err instanceof Error ? err.message : String(err);
        noticeBox.className = "notice-error";
      }
    }

    if (session && layer && hovered) {
      tooltip.hidden = false;
      tooltip.textContent =
        `(${hovered[0]}, ${hovered[1]}) ${valueAt(layer, hovered).toFixed(4)}`;
    } else {
      tooltip.hidden = true;
    }
  }

  return store;
}

function drawLossCurve(canvas: HTMLCanvasElement, history: [number, number][]): void {
  const ctx = canvas.getContext("2d");
  if (!ctx || history.length === 0) {
    return;
  }
  const losses = history.map(([, loss]) => loss);
  const top = Math.max(...losses, 1);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#3567a8";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  history.forEach(([, loss], index) => {
    const x = (index / Math.max(history.length - 1, 1)) * (canvas.width - 8) + 4;
    const y = canvas.height - 6 - (loss / top) * (canvas.height - 12);
    if (index === 0) {
      ctx.moveTo(x, y);
    } else {
      ctx.lineTo(x, y);
    }
  });
  ctx.stroke();
}
