import { ApiClient } from "./api.js";
import { STAGES, TraceViewState } from "./view-state.js";
import type { ImageInfo, Mode } from "./types.js";

const canvas = document.getElementById("view") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const statusBar = document.getElementById("status")!;
const dialogBox = document.getElementById("dialog")!;
const dialogText = document.getElementById("dialog-text")!;
const imageSelect = document.getElementById("image-select") as HTMLSelectElement;
const stageBar = document.getElementById("stages")!;

const api = new ApiClient();
let bitmap: ImageBitmap | null = null;

const state = new TraceViewState(api, canvas.width, canvas.height, render);

function render(): void {
  ctx.fillStyle = "#10151c";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  if (bitmap && state.image) {
    ctx.imageSmoothingEnabled = state.zoom < 2;
    ctx.drawImage(
      bitmap,
      state.panX,
      state.panY,
      state.image.width * state.zoom,
      state.image.height * state.zoom,
    );
  }
  if (state.overlay.length) {
    ctx.strokeStyle = "#ff3b30";
    ctx.lineWidth = 1.6;
    ctx.beginPath();
    state.overlay.forEach((p, i) => {
      const s = state.imageToScreen(p);
      if (i === 0) ctx.moveTo(s.x, s.y);
      else ctx.lineTo(s.x, s.y);
    });
    ctx.stroke();
  }
  if (state.pendingStart) {
    const s = state.imageToScreen(state.pendingStart);
    ctx.fillStyle = "#34c759";
    ctx.beginPath();
    ctx.arc(s.x, s.y, 5, 0, Math.PI * 2);
    ctx.fill();
  }
  statusBar.textContent = state.tracing ? "Tracing…" : state.status;
  if (state.dialog) {
    dialogText.textContent = state.dialog;
    dialogBox.classList.remove("hidden");
  } else {
    dialogBox.classList.add("hidden");
  }
  document.querySelectorAll<HTMLButtonElement>("[data-mode]").forEach((btn) => {
    btn.classList.toggle("active", btn.dataset.mode === state.mode);
  });
  stageBar.querySelectorAll<HTMLElement>(".stage").forEach((el, i) => {
    el.classList.toggle("current", i + 1 === state.stage);
  });
}

function renderStages(): void {
  stageBar.innerHTML = "";
  STAGES.forEach((label, i) => {
    const el = document.createElement("button");
    el.className = "stage";
    el.textContent = label;
    el.disabled = i === 2; // feature identification lives elsewhere; inert here
    stageBar.appendChild(el);
  });
}

async function loadImage(info: ImageInfo): Promise<void> {
  const res = await fetch(api.imageUrl(info.id));
  bitmap = await createImageBitmap(await res.blob());
  state.loadImage(info);
}

async function boot(): Promise<void> {
  renderStages();
  const images = await api.listImages();
  imageSelect.innerHTML = "";
  for (const info of images) {
    const option = document.createElement("option");
    option.value = info.id;
    option.textContent = `${info.id} (${info.width}x${info.height})`;
    imageSelect.appendChild(option);
  }
  imageSelect.onchange = () => {
    const info = images.find((i) => i.id === imageSelect.value);
    if (info) void loadImage(info);
  };
  if (images.length) void loadImage(images[0]);
  else statusBar.textContent = "No images served; start the API with --images.";
}

// -- input wiring ------------------------------------------------------------

let dragging = false;
let erasing = false;
let penciling = false;
let lastDrag = { x: 0, y: 0 };

canvas.addEventListener("mousedown", (ev) => {
  const p = { x: ev.offsetX, y: ev.offsetY };
  if (ev.shiftKey || ev.button === 1) {
    dragging = true;
    lastDrag = p;
    return;
  }
  if (ev.button !== 0) return;
  if (state.mode === "eraser") {
    erasing = true;
    state.eraseAt(p);
  } else if (state.mode === "pencil") {
    penciling = true;
    state.pencilAt(p);
  } else {
    state.handleClick(p);
  }
});

canvas.addEventListener("mousemove", (ev) => {
  const p = { x: ev.offsetX, y: ev.offsetY };
  if (dragging) {
    state.panBy(p.x - lastDrag.x, p.y - lastDrag.y);
    lastDrag = p;
  } else if (erasing) {
    state.eraseAt(p);
  } else if (penciling) {
    state.pencilAt(p);
  }
});

window.addEventListener("mouseup", () => {
  dragging = erasing = penciling = false;
});

canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  state.zoomAt({ x: ev.offsetX, y: ev.offsetY }, ev.deltaY < 0 ? 1.2 : 1 / 1.2);
});

document.querySelectorAll<HTMLButtonElement>("[data-mode]").forEach((btn) => {
  btn.onclick = () => state.setMode(btn.dataset.mode as Mode);
});
document.getElementById("fit")!.onclick = () => state.fitToWindow();
document.getElementById("accept")!.onclick = () => void state.accept();
document.getElementById("dialog-ok")!.onclick = () => state.dismissDialog();

void boot();
