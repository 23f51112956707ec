import { Verdict } from './types.js';

const KEYMAP: Record<string, Verdict> = {
  a: 'accept',
  ArrowRight: 'accept',
  r: 'reject',
  ArrowLeft: 'reject',
};

export function verdictForKey(key: string): Verdict | null {
  return KEYMAP[key] ?? null;
}

/** Bind the accept/reject shortcuts; returns an unbind function. */
export function bindKeyboard(
  target: Pick<Window, 'addEventListener' | 'removeEventListener'>,
  onVerdict: (v: Verdict) => void,
): () => void {
  const handler = (event: KeyboardEvent) => {
    const tag = (event.target as HTMLElement | null)?.tagName;
    if (tag === 'INPUT' || tag === 'TEXTAREA' || tag === 'SELECT') return;
    const verdict = verdictForKey(event.key);
    if (verdict) {
      event.preventDefault();
      onVerdict(verdict);
    }
  };
  target.addEventListener('keydown', handler as EventListener);
  return () => target.removeEventListener('keydown', handler as EventListener);
}
