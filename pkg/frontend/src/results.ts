import { renderCurve } from './chart.js';
import { LabelFlow } from './flow.js';
import { ResultsPayload } from './types.js';

const KIND_LABELS: Record<string, string> = {
  l2: 'squared distance',
  l1: 'absolute distance',
  kl: 'entropy distance',
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function thresholdTable(results: ResultsPayload): HTMLElement {
  const table = el('table', 'thresholds');
  const head = el('tr');
  for (const caption of ['distance', 'pessimist c-', 'personal c', 'optimist c+', 'min disagreement']) {
    head.appendChild(el('th', undefined, caption));
  }
  table.appendChild(head);
  for (const [kind, t] of Object.entries(results.thresholds)) {
    const row = el('tr');
    row.appendChild(el('td', undefined, KIND_LABELS[kind] ?? kind));
    row.appendChild(el('td', undefined, t.c_minus.toFixed(3) + (t.minus_crossed ? '' : ' *')));
    row.appendChild(el('td', undefined, t.c_acc.toFixed(3)));
    row.appendChild(el('td', undefined, t.c_plus.toFixed(3) + (t.plus_crossed ? '' : ' *')));
    row.appendChild(el('td', undefined, (t.mcr_min * 100).toFixed(1) + '%'));
    table.appendChild(row);
  }
  return table;
}

function optimalKSection(results: ResultsPayload): HTMLElement {
  const section = el('div', 'optimal-k');
  if (!results.optimal_k) return section;
  for (const [kind, table] of Object.entries(results.optimal_k)) {
    const block = el('div', 'optimal-k-block');
    block.appendChild(
      el(
        'h3',
        undefined,
        `${KIND_LABELS[kind] ?? kind}: use ${table.k_opt} bins ` +
          `(alpha=${table.alpha}, n=${table.n})`,
      ),
    );
    const rows = el('table', 'per-k');
    const head = el('tr');
    for (const caption of ['bins', 'critical value', 'gap to personal c']) {
      head.appendChild(el('th', undefined, caption));
    }
    rows.appendChild(head);
    for (const row of table.per_k) {
      const tr = el('tr');
      if (row.k === table.k_opt) tr.className = 'chosen';
      tr.appendChild(el('td', undefined, String(row.k)));
      tr.appendChild(el('td', undefined, row.c.toFixed(4)));
      tr.appendChild(el('td', undefined, row.gap.toFixed(4)));
      rows.appendChild(tr);
    }
    block.appendChild(rows);
    section.appendChild(block);
  }
  return section;
}

/** Results view: personal thresholds, disagreement curves, optimal-k lookup. */
export function renderResults(container: HTMLElement, flow: LabelFlow): void {
  const results = flow.state.results;
  if (!results) return;
  container.replaceChildren();

  container.appendChild(el('h2', undefined, `Your thresholds after ${results.n_labels} labels`));
  container.appendChild(thresholdTable(results));
  const note = el('p', 'footnote');
  note.textContent =
    results.bin_decision_correlation === null
      ? 'Bin/verdict correlation unavailable for this session.'
      : `Correlation between bin count and acceptance: ${results.bin_decision_correlation.toFixed(2)}`;
  container.appendChild(note);

  const curves = el('div', 'curves');
  for (const [kind, curve] of Object.entries(results.mcr_curves)) {
    renderCurve(curves, curve.c, curve.mcr, `disagreement vs threshold (${KIND_LABELS[kind] ?? kind})`);
  }
  container.appendChild(curves);

  const form = el('div', 'kopt-form');
  form.appendChild(el('h2', undefined, 'Bins to use for your next histogram'));
  const alphaInput = el('input') as HTMLInputElement;
  alphaInput.type = 'number';
  alphaInput.step = '0.01';
  alphaInput.value = '0.05';
  alphaInput.id = 'alpha';
  const nInput = el('input') as HTMLInputElement;
  nInput.type = 'number';
  nInput.value = '100';
  nInput.id = 'n';
  const button = el('button', undefined, 'Compute') as HTMLButtonElement;
  button.id = 'compute-kopt';
  const output = el('div', 'kopt-output');
  form.append('false-reject level ', alphaInput, ' observations ', nInput, ' ', button);
  container.appendChild(form);
  container.appendChild(output);

  button.addEventListener('click', async () => {
    button.disabled = true;
    try {
      const updated = await flow.fetchOptimalK(Number(alphaInput.value), Number(nInput.value));
      output.replaceChildren(optimalKSection(updated));
    } catch (err) {
      output.replaceChildren(el('p', 'error', String(err)));
    } finally {
      button.disabled = false;
    }
  });
}
