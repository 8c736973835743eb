import init, { Demo } from './pkg/newslens_web.js';

const COLORS = { positive: '#2b8a3e', negative: '#c2255c', mixed: '#7048e8', neutral: '#868e96' };
const CYCLE = ['positive', 'mixed', 'negative', 'neutral'];
const SVG = 'http://www.w3.org/2000/svg';

const $ = (id) => document.getElementById(id);
const state = { demo: null, threshold: 20, sx: 0.5, sy: 0.5, center: 'Q35525', centerName: 'White House', outlet: 'Breitbart', beliefs: {}, candidates: [] };

function el(name, attrs = {}, parent) {
  const node = document.createElementNS(SVG, name);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (parent) parent.appendChild(node);
  return node;
}

function status(text, error = false) {
  $('status').textContent = text;
  $('status').className = error ? 'status err' : 'status';
}

function call(fn) {
  try {
    return JSON.parse(fn());
  } catch (e) {
    status(String(e), true);
    return null;
  }
}

// Scatter: x is the positive score, y the negative score, origin bottom left.
const PAD = 30, SIZE = 380;
const toX = (v) => PAD + v * SIZE;
const toY = (v) => PAD + (1 - v) * SIZE;
const fromX = (px) => Math.min(1, Math.max(0, (px - PAD) / SIZE));
const fromY = (py) => Math.min(1, Math.max(0, 1 - (py - PAD) / SIZE));

function drawScatter() {
  const svg = $('scatter');
  svg.replaceChildren();
  const data = call(() => state.demo.scatter(state.threshold, state.sx, state.sy));
  if (!data) return;
  el('line', { class: 'axis', x1: PAD, y1: toY(0), x2: toX(1), y2: toY(0) }, svg);
  el('line', { class: 'axis', x1: PAD, y1: toY(0), x2: PAD, y2: toY(1) }, svg);
  el('text', { x: toX(1) - 70, y: toY(0) + 20 }, svg).textContent = 'positive →';
  el('text', { x: 4, y: PAD - 10 }, svg).textContent = '↑ negative';
  el('line', { class: 'seg', x1: toX(state.sx), y1: toY(0), x2: toX(state.sx), y2: toY(1) }, svg);
  el('line', { class: 'seg', x1: toX(0), y1: toY(state.sy), x2: toX(1), y2: toY(state.sy) }, svg);
  for (const p of data.points) {
    const dot = el('circle', {
      class: p.entity === state.center ? 'pt center' : 'pt',
      cx: toX(p.score_pos), cy: toY(p.score_neg), r: 3 + 2 * p.color_bucket,
      fill: COLORS[p.category],
    }, svg);
    el('title', {}, dot).textContent = `${p.display_name}: ${p.pos_articles} positive, ${p.neg_articles} negative, ${p.neu_articles} neutral`;
    dot.addEventListener('click', () => chooseCenter(p.entity, p.display_name));
  }
  const handle = el('circle', { class: 'handle', cx: toX(state.sx), cy: toY(state.sy), r: 8 }, svg);
  handle.addEventListener('pointerdown', startDrag);
  $('seg-value').textContent = `(${state.sx.toFixed(2)}, ${state.sy.toFixed(2)})`;
}

function startDrag(event) {
  const svg = $('scatter');
  const box = svg.getBoundingClientRect();
  const move = (e) => {
    state.sx = fromX(e.clientX - box.left);
    state.sy = fromY(e.clientY - box.top);
    drawScatter();
  };
  const up = () => {
    window.removeEventListener('pointermove', move);
    window.removeEventListener('pointerup', up);
  };
  window.addEventListener('pointermove', move);
  window.addEventListener('pointerup', up);
  event.preventDefault();
}

function hexPath(cx, cy, r) {
  const pts = [];
  for (let i = 0; i < 6; i++) {
    const a = (Math.PI / 180) * (60 * i - 30);
    pts.push(`${cx + r * Math.cos(a)},${cy + r * Math.sin(a)}`);
  }
  return pts.join(' ');
}

function drawHive(svg, cells, centerSentiment, { conflicts = new Set(), onClick = null } = {}) {
  svg.replaceChildren();
  const R = 22;
  const ox = Number(svg.getAttribute('width')) / 2, oy = Number(svg.getAttribute('height')) / 2;
  for (const c of cells) {
    const region = c.role.role === 'center' ? centerSentiment : c.role.region;
    const cx = ox + c.x * R, cy = oy + c.y * R;
    const hex = el('polygon', {
      class: conflicts.has(c.topic) ? 'hex conflict' : 'hex',
      points: hexPath(cx, cy, R - 1), fill: COLORS[region],
    }, svg);
    el('title', {}, hex).textContent = `${c.name} (${region})`;
    if (onClick && c.role.role !== 'center') hex.addEventListener('click', () => onClick(c.topic));
    el('text', { class: 'hex-label', x: cx, y: cy + 3 }, svg).textContent = c.name.slice(0, 7);
  }
}

function beliefsJson() {
  return JSON.stringify({ center: $('center-sentiment').value, assignments: state.beliefs });
}

function drawBeliefs() {
  $('data').replaceChildren();
  $('conflicts').replaceChildren();
  const chips = $('chips');
  chips.replaceChildren();
  for (const c of state.candidates) {
    const region = state.beliefs[c.id];
    const b = document.createElement('button');
    b.textContent = c.name;
    if (region) {
      b.style.background = COLORS[region];
      b.style.color = '#fff';
    }
    b.addEventListener('click', () => cycle(c.id));
    chips.appendChild(b);
  }
  const layout = call(() => state.demo.belief_layout(state.center, state.outlet, beliefsJson()));
  if (layout) drawHive($('belief'), layout.cells, $('center-sentiment').value, { onClick: cycle });
  const left = state.candidates.filter((c) => !state.beliefs[c.id]).length;
  $('reveal').disabled = left > 0;
  $('reveal').textContent = left > 0 ? `Place ${left} more` : 'Reveal the data';
}

function cycle(topic) {
  const cur = state.beliefs[topic];
  state.beliefs[topic] = CYCLE[(CYCLE.indexOf(cur) + 1) % CYCLE.length];
  drawBeliefs();
}

function resetHive() {
  state.beliefs = {};
  $('center-name').textContent = state.centerName;
  const list = call(() => state.demo.candidates(state.center, state.outlet));
  state.candidates = list || [];
  if (list) status(`${list.length} topics co-occur with ${state.centerName} at ${state.outlet}.`);
  drawBeliefs();
}

function chooseCenter(id, name) {
  state.center = id;
  state.centerName = name;
  drawScatter();
  resetHive();
}

function reveal() {
  const out = call(() => state.demo.reveal(state.center, state.outlet, state.sx, state.sy, beliefsJson()));
  if (!out) return;
  const ids = new Set(out.conflicts.map((c) => c.id));
  drawHive($('data'), out.cells, out.center_sentiment, { conflicts: ids });
  const box = $('conflicts');
  box.replaceChildren();
  const head = document.createElement('p');
  head.textContent = `${out.conflicts.length} discrepancies between your hive and the coverage.`;
  box.appendChild(head);
  const ul = document.createElement('ul');
  for (const c of out.conflicts) {
    const li = document.createElement('li');
    li.textContent = `${c.name}: you said ${c.user}, the coverage is ${c.data}`;
    ul.appendChild(li);
  }
  box.appendChild(ul);
}

async function main() {
  await init();
  state.demo = new Demo();
  for (const o of JSON.parse(state.demo.outlets())) {
    const opt = document.createElement('option');
    opt.textContent = o;
    opt.selected = o === state.outlet;
    $('outlet').appendChild(opt);
  }
  $('outlet').addEventListener('change', (e) => { state.outlet = e.target.value; resetHive(); });
  $('center-sentiment').addEventListener('change', drawBeliefs);
  $('threshold').addEventListener('input', (e) => {
    state.threshold = Number(e.target.value);
    $('threshold-value').textContent = e.target.value;
    drawScatter();
  });
  $('reveal').addEventListener('click', reveal);
  drawScatter();
  resetHive();
}

main().catch((e) => status(String(e), true));
