/** DOM bootstrap: binds browser events to the MapClient and reflects
 * its models (panel, legend, banner, search) into the page. */

import { Api } from "./api.js";
import { MapClient, type OverlaySlot } from "./client.js";
import type { OverlayDescriptor } from "./state.js";
import { CanvasSurface } from "./surface.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, cls?: string, text?: string): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

function option(value: string, label = value, disabled = false): HTMLOptionElement {
  const o = el("option");
  o.value = value;
  o.textContent = label;
  o.disabled = disabled;
  return o;
}

export async function startApp(root: HTMLElement): Promise<void> {
  const client = new MapClient(new Api(""));

  root.innerHTML = "";
  const banner = el("div", "banner");
  banner.hidden = true;
  const toolbar = el("div", "toolbar");
  const mapArea = el("div", "map-area");
  const primaryCanvas = el("canvas", "map");
  const compareCanvas = el("canvas", "map compare-pane");
  compareCanvas.hidden = true;
  const sidebar = el("div", "sidebar");
  mapArea.append(primaryCanvas, compareCanvas);
  root.append(banner, toolbar, mapArea, sidebar);

  // toolbar: search, edges toggle, variant, overlay form, compare pin
  const searchBox = el("input");
  searchBox.placeholder = "search topics";
  const searchList = el("div", "search-results");
  const edgesToggle = el("input");
  edgesToggle.type = "checkbox";
  const edgesLabel = el("label", "toggle", " edges");
  edgesLabel.prepend(edgesToggle);
  const variantSelect = el("select", "variant");
  const overlayKind = el("select");
  for (const k of ["none", "citations", "hr", "department", "document"]) {
    overlayKind.append(option(k));
  }
  const universitySelect = el("select");
  const modeSelect = el("select");
  for (const m of ["full", "split"]) modeSelect.append(option(m));
  const normalizeSelect = el("select");
  for (const n of ["none", "rate", "literal"]) normalizeSelect.append(option(n));
  const baseSelect = el("select");
  for (const b of ["WORLD", "US", "EU"]) baseSelect.append(option(b));
  const keywordBox = el("input");
  keywordBox.placeholder = "department keyword";
  const documentBox = el("textarea");
  documentBox.placeholder = "paste document text";
  const applyBtn = el("button", "", "apply overlay");
  const pinBtn = el("button", "", "pin to compare");
  const clearCompareBtn = el("button", "", "clear compare");
  toolbar.append(searchBox, searchList, edgesLabel, variantSelect, overlayKind,
                 universitySelect, modeSelect, normalizeSelect, baseSelect,
                 keywordBox, documentBox, applyBtn, pinBtn, clearCompareBtn);

  const panelBox = el("div", "panel");
  const legendBox = el("div", "legend");
  sidebar.append(panelBox, legendBox);

  const surfaces: Record<OverlaySlot, CanvasSurface> = {
    primary: new CanvasSurface(primaryCanvas),
    compare: new CanvasSurface(compareCanvas),
  };

  function sizeCanvases(): void {
    const split = !compareCanvas.hidden;
    const w = mapArea.clientWidth;
    const h = mapArea.clientHeight;
    primaryCanvas.width = split ? Math.floor(w / 2) : w;
    primaryCanvas.height = h;
    compareCanvas.width = Math.floor(w / 2);
    compareCanvas.height = h;
    client.fitTo(surfaces.primary);
  }

  function legendText(slot: OverlaySlot): string {
    const legend = client.legend(slot);
    if (!legend) return "";
    const scale = legend.hint === "SIGNED_CIRCLES"
      ? `green +, purple -, largest circle = ${legend.maxAbs.toFixed(2)}`
      : `strongest heat = ${legend.maxAbs.toFixed(2)}`;
    return `${legend.title}: ${scale}`;
  }

  function reflect(): void {
    banner.hidden = client.banner === null;
    banner.textContent = client.banner ?? "";
    const panel = client.panel;
    panelBox.innerHTML = "";
    if (panel?.state === "ok") {
      panelBox.append(el("h3", "", panel.info.label));
      panelBox.append(el("div", "count",
        `${panel.info.weight} researchers work on this topic`));
      const ul = el("ul");
      for (const nb of panel.info.neighbors) {
        ul.append(el("li", "", `${nb.label} (${nb.weight})`));
      }
      panelBox.append(ul);
    } else if (panel?.state === "missing") {
      panelBox.append(el("div", "", `topic ${panel.id} not found`));
    }
    legendBox.textContent = [legendText("primary"), legendText("compare")]
      .filter(Boolean).join("  |  ");
    searchList.innerHTML = "";
    for (const hit of client.searchResults) {
      const row = el("div", "hit", `${hit.label} (${hit.weight})`);
      row.addEventListener("mousedown", () => {
        client.choose(hit);
        client.searchResults = [];
        animate();
      });
      searchList.append(row);
    }
  }

  function draw(): void {
    client.render(surfaces.primary, "primary");
    if (!compareCanvas.hidden) client.render(surfaces.compare, "compare");
    reflect();
  }

  async function refresh(): Promise<void> {
    await client.prepare();
    history.replaceState(null, "", "#" + client.fragment());
    draw();
  }

  function animate(): void {
    if (!client.animating) return;
    const step = (): void => {
      const more = client.tick();
      void refresh();
      if (more) requestAnimationFrame(step);
    };
    requestAnimationFrame(step);
  }

  // map interactions
  let dragging: { x: number; y: number } | null = null;
  let moved = false;
  primaryCanvas.addEventListener("mousedown", (e) => {
    dragging = { x: e.offsetX, y: e.offsetY };
    moved = false;
  });
  primaryCanvas.addEventListener("mousemove", (e) => {
    if (!dragging) return;
    const dx = e.offsetX - dragging.x;
    const dy = e.offsetY - dragging.y;
    if (Math.abs(dx) + Math.abs(dy) > 2) moved = true;
    client.panBy(dx, dy);
    dragging = { x: e.offsetX, y: e.offsetY };
    void refresh();
  });
  primaryCanvas.addEventListener("mouseup", (e) => {
    dragging = null;
    if (moved) return;
    const id = client.topicAt({ x: e.offsetX, y: e.offsetY }, surfaces.primary);
    const after = (): void => void refresh();
    if (id) void client.select(id).then(after);
    else {
      client.clearSelection();
      after();
    }
  });
  primaryCanvas.addEventListener("wheel", (e) => {
    e.preventDefault();
    client.zoomBy(e.deltaY < 0 ? 0.25 : -0.25);
    void refresh();
  }, { passive: false });
  window.addEventListener("keydown", (e) => {
    if (e.key === "Escape") {
      client.clearSelection();
      draw();
    }
  });
  window.addEventListener("resize", () => {
    sizeCanvases();
    draw();
  });
  window.addEventListener("hashchange", () => {
    void client.applyFragment(location.hash).then(draw);
  });

  searchBox.addEventListener("input", () => {
    void client.search(searchBox.value).then(reflect);
  });

  edgesToggle.addEventListener("change", () => {
    client.toggleEdges();
    draw();
  });

  function currentDescriptor(): OverlayDescriptor | null {
    const kind = overlayKind.value;
    if (kind === "none") return null;
    if (kind === "department") return { kind, keyword: keywordBox.value };
    if (kind === "document") return { kind, text: documentBox.value };
    const d: OverlayDescriptor = {
      kind: kind as "citations" | "hr",
      university: universitySelect.value,
      base: baseSelect.value,
    };
    if (kind === "citations") {
      d.mode = modeSelect.value as "full" | "split";
      d.normalize = normalizeSelect.value as "none" | "rate" | "literal";
    }
    return d;
  }

  applyBtn.addEventListener("click", () => {
    void client.applyOverlay(currentDescriptor(), "primary").then(refresh);
  });
  pinBtn.addEventListener("click", () => {
    const desc = client.view.overlay;
    compareCanvas.hidden = desc === null;
    sizeCanvases();
    void client.applyOverlay(desc, "compare").then(refresh);
  });
  clearCompareBtn.addEventListener("click", () => {
    compareCanvas.hidden = true;
    sizeCanvases();
    void client.applyOverlay(null, "compare").then(refresh);
  });

  variantSelect.addEventListener("change", () => {
    void client.setVariant(variantSelect.value).then(() => {
      sizeCanvases();
      draw();
    });
  });

  await client.init(location.hash.replace(/^#/, ""));
  for (const v of client.variants()) {
    variantSelect.append(option(v.name, v.name, !v.served));
    if (v.served) variantSelect.value = v.name;
  }
  for (const u of client.universityRows) {
    universitySelect.append(option(u.id, `${u.name} (${u.id})`));
  }
  sizeCanvases();
  await refresh();
}
