/** Tiny DOM construction helpers; no framework, no virtual DOM. */

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

/** Arabic text pane: right-to-left block, tagged for font selection. */
export function arabicPaneAttrs(extra: Record<string, string> = {}): Record<string, string> {
  return { dir: 'rtl', lang: 'ar', class: `arabic-pane ${extra.class ?? ''}`.trim(), ...extra };
}
