import { StudyClient } from './api.js';
import { renderHistogram } from './chart.js';
import { LabelFlow } from './flow.js';
import { bindKeyboard } from './keyboard.js';
import { renderResults } from './results.js';

function sessionIdFromHash(): string | null {
  const match = window.location.hash.match(/s=([0-9a-f]+)/);
  return match ? match[1] : null;
}

function boot(): void {
  const chartHost = document.getElementById('chart')!;
  const progressHost = document.getElementById('progress')!;
  const resultsHost = document.getElementById('results')!;
  const labelingHost = document.getElementById('labeling')!;
  const startHost = document.getElementById('start')!;

  const flow = new LabelFlow(new StudyClient(''));

  flow.onChange((state) => {
    startHost.hidden = state.phase !== 'idle' && state.phase !== 'error';
    labelingHost.hidden = state.phase !== 'labeling';
    resultsHost.hidden = state.phase !== 'done';

    if (state.phase === 'labeling' && state.current) {
      window.location.hash = `s=${state.sessionId}`;
      progressHost.textContent = `${state.progress + 1} / ${state.total}`;
      renderHistogram(chartHost, state.current.heights);
    } else if (state.phase === 'done') {
      progressHost.textContent = 'complete';
      renderResults(resultsHost, flow);
    } else if (state.phase === 'error') {
      progressHost.textContent = '';
      document.getElementById('error')!.textContent = state.error ?? 'something went wrong';
    }
  });

  document.getElementById('accept')!.addEventListener('click', () => void flow.submit('accept'));
  document.getElementById('reject')!.addEventListener('click', () => void flow.submit('reject'));
  bindKeyboard(window, (verdict) => void flow.submit(verdict));

  document.getElementById('new-session')!.addEventListener('click', () => {
    window.location.hash = '';
    void flow.start();
  });

  const existing = sessionIdFromHash();
  if (existing) {
    void flow.start(undefined, existing);
  }
}

boot();
