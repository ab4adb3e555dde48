/** Application wiring: queue list, canvas editor, keyboard handling, submit
 * flow. Everything testable lives in api/queue/session/keyboard; this file is
 * only DOM glue. */

import { ApiClient, ApiError } from './api.js';
import { drawEditor, hitTest } from './editor.js';
import { keyToCommand } from './keyboard.js';
import { toRows } from './queue.js';
import { EditorSession } from './session.js';
import type { QueueEntryDto } from './types.js';

const api = new ApiClient('');

const queueEl = document.getElementById('queue') as HTMLElement;
const bannerEl = document.getElementById('banner') as HTMLElement;
const statusEl = document.getElementById('status') as HTMLElement;
const editorEl = document.getElementById('editor') as HTMLElement;
const canvas = document.getElementById('canvas') as HTMLCanvasElement;
const classFiltersEl = document.getElementById('class-filters') as HTMLElement;

let entries: QueueEntryDto[] = [];
let session: EditorSession | null = null;
let focusedId: number | null = null;
let image: HTMLImageElement | null = null;

function banner(text: string, isError = false): void {
  bannerEl.textContent = text;
  bannerEl.className = isError ? 'banner error' : 'banner';
  bannerEl.hidden = text === '';
}

async function refreshStatus(): Promise<void> {
  try {
    const status = await api.getStatus();
    const report = status.latest_report;
    statusEl.textContent =
      `cycle t=${status.t} · pending ${status.pending}/${status.budget}` +
      (report ? ` · AP50 ${report.ap50.toFixed(3)}` : '') +
      (status.terminal ? ' · loop finished' : '');
  } catch {
    statusEl.textContent = 'service unreachable';
  }
}

async function refreshQueue(): Promise<void> {
  try {
    entries = await api.getQueue();
    banner('');
  } catch (error) {
    entries = [];
    if (error instanceof ApiError && error.status === 409) {
      banner('no pending batch');
    } else {
      banner('cannot reach the annotation service', true);
    }
  }
  renderQueue();
  void refreshStatus();
}

function renderQueue(): void {
  queueEl.replaceChildren();
  for (const row of toRows(entries)) {
    const item = document.createElement('li');
    const thumb = document.createElement('img');
    thumb.src = row.thumbnailUrl;
    thumb.width = 96;
    const text = document.createElement('span');
    text.textContent =
      `#${row.rank} ${row.imageId} · score ${row.fusedScore.toFixed(4)} · ` +
      `${row.proposalCount} proposals`;
    item.append(thumb, text);
    item.onclick = () => void openEditor(row.imageId);
    queueEl.append(item);
  }
}

async function openEditor(imageId: string): Promise<void> {
  const entry = entries.find((e) => e.image_id === imageId);
  if (!entry) return;
  const status = await api.getStatus();
  session = new EditorSession(entry, status.num_classes);
  focusedId = session.allBoxes()[0]?.id ?? null;
  image = new Image();
  image.onload = () => {
    canvas.width = entry.width;
    canvas.height = entry.height;
    redraw();
  };
  image.src = api.imageUrl(imageId);
  editorEl.hidden = false;
  renderClassFilters();
}

function redraw(): void {
  if (!session || !image) return;
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  drawEditor(ctx, image, session, {
    selectedIds: new Set(session.selectedIds()),
    focusedId,
  });
}

function renderClassFilters(): void {
  if (!session) return;
  classFiltersEl.replaceChildren();
  for (let c = 0; c < session.classCount(); c++) {
    const label = document.createElement('label');
    const checkbox = document.createElement('input');
    checkbox.type = 'checkbox';
    checkbox.checked = session.isClassVisible(c);
    checkbox.onchange = () => {
      session?.setClassVisible(c, checkbox.checked);
      redraw();
    };
    label.append(checkbox, ` class ${c}`);
    classFiltersEl.append(label);
  }
}

function moveFocus(step: number): void {
  if (!session) return;
  const boxes = session.visibleBoxes();
  if (boxes.length === 0) return;
  const index = boxes.findIndex((b) => b.id === focusedId);
  const next = boxes[(index + step + boxes.length) % boxes.length];
  focusedId = next ? next.id : null;
}

async function submitCurrent(): Promise<void> {
  if (!session) return;
  const problems = session.validate();
  if (problems.length > 0) {
    banner(problems.join('; '), true);
    return;
  }
  try {
    const ack = await api.submit(session.imageId, session.buildSubmission());
    banner(
      ack.staged === 0
        ? `cycle advanced to t=${ack.t}`
        : `submitted (${ack.staged} staged)`,
    );
    session = null;
    editorEl.hidden = true;
    await refreshQueue();
  } catch (error) {
    if (error instanceof ApiError) {
      banner(`submit rejected: ${JSON.stringify(error.detail)}`, true);
    } else {
      banner('submit failed: service unreachable', true);
    }
  }
}

document.addEventListener('keydown', (event) => {
  if (!session || event.target instanceof HTMLInputElement) return;
  const command = keyToCommand(event);
  if (!command) return;
  event.preventDefault();
  switch (command.kind) {
    case 'set-class':
      if (command.classId < session.classCount()) {
        if (session.selectedIds().length > 0) {
          session.setClassForSelection(command.classId);
        } else if (focusedId !== null) {
          session.setClass(focusedId, command.classId);
        }
      }
      break;
    case 'toggle-quality':
      if (focusedId !== null) session.toggleQuality(focusedId);
      break;
    case 'keep':
      if (focusedId !== null) session.keepBox(focusedId);
      break;
    case 'discard':
      if (focusedId !== null) {
        session.discardBox(focusedId);
        moveFocus(1);
      }
      break;
    case 'undo':
      session.undo();
      break;
    case 'submit':
      void submitCurrent();
      return;
    case 'next-box':
      moveFocus(1);
      break;
    case 'prev-box':
      moveFocus(-1);
      break;
    case 'add-class':
      session.addClass();
      renderClassFilters();
      break;
    case 'clear-selection':
      session.clearSelection();
      break;
  }
  redraw();
});

canvas.addEventListener('click', (event) => {
  if (!session) return;
  const rect = canvas.getBoundingClientRect();
  const x = ((event.clientX - rect.left) / rect.width) * canvas.width;
  const y = ((event.clientY - rect.top) / rect.height) * canvas.height;
  const hit = hitTest(session, x, y);
  if (hit) {
    if (event.shiftKey) session.toggleSelection(hit.id);
    else focusedId = hit.id;
  }
  redraw();
});

void refreshQueue();
setInterval(() => void refreshStatus(), 5000);
