// Card tray model: the ordered program under edit. Pure functions only;
// the DOM layer re-renders from the returned arrays.

export interface Card {
  symbol: string;
  confidence: number;
  warning: boolean; // below the server's reject threshold: shown, never run
}

export function cardsFromResponse(doc: {
  symbols: string[];
  confidences: number[];
  rejected?: { confidence: number; best_guess: string }[];
}): Card[] {
  const cards: Card[] = doc.symbols.map((symbol, i) => ({
    symbol,
    confidence: doc.confidences[i] ?? 0,
    warning: false,
  }));
  for (const rej of doc.rejected ?? []) {
    cards.push({ symbol: rej.best_guess, confidence: rej.confidence, warning: true });
  }
  return cards;
}

export function moveCard(cards: Card[], index: number, delta: number): Card[] {
  const target = index + delta;
  if (index < 0 || index >= cards.length || target < 0 || target >= cards.length) return cards;
  const next = cards.slice();
  [next[index], next[target]] = [next[target], next[index]];
  return next;
}

export function removeCard(cards: Card[], index: number): Card[] {
  return cards.filter((_, i) => i !== index);
}

export function duplicateCard(cards: Card[], index: number): Card[] {
  if (index < 0 || index >= cards.length) return cards;
  const next = cards.slice();
  next.splice(index + 1, 0, { ...cards[index] });
  return next;
}

/** The symbols that actually run: tray order, warning cards excluded. */
export function programOf(cards: Card[]): string[] {
  return cards.filter((c) => !c.warning).map((c) => c.symbol);
}

export function canRun(cards: Card[]): boolean {
  return programOf(cards).length > 0;
}

export const SYMBOL_GLYPHS: Record<string, string> = {
  up: "↑",
  down: "↓",
  forward_right: "⬏",
  forward_left: "⬎",
  rotate_right: "↻",
  rotate_left: "↺",
};

export function glyphFor(symbol: string): string {
  return SYMBOL_GLYPHS[symbol] ?? "?";
}
