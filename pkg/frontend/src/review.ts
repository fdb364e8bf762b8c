/**
 * Review screen: English fields read-only on the left (LTR), editable
 * Arabic on the right (RTL), score history in between, and a keyboard-first
 * decision bar (a approve / e save edit / r reject).
 *
 * The client refuses to post misaligned or empty field lists, and an
 * AlreadyDecided response is surfaced as a banner without destroying the
 * reviewer's local edits.
 */

import { ApiError, ReviewApi, TaskDetail } from './api.js';
import { arabicPaneAttrs, clear, el } from './dom.js';

export interface ReviewOptions {
  onDecided?: (taskId: string, unitStatus: string) => void;
}

export function validateEditedFields(
  englishFields: string[][],
  edited: string[][],
): string | null {
  if (edited.length !== englishFields.length) {
    return `field count mismatch: expected ${englishFields.length}, got ${edited.length}`;
  }
  for (let i = 0; i < englishFields.length; i += 1) {
    const expected = englishFields[i]?.[0];
    const got = edited[i]?.[0];
    if (expected !== got) {
      return `field ${i + 1} name mismatch: expected ${expected}, got ${got}`;
    }
    if (!(edited[i]?.[1] ?? '').trim()) {
      return `field ${String(got)} is empty`;
    }
  }
  return null;
}

function scoreHistory(detail: TaskDetail): HTMLElement {
  const points = detail.unit.score_history;
  const values = points.map((p) => p.value);
  const spark = el('div', {
    class: 'score-sparkline',
    'data-points': JSON.stringify(points.map((p) => [p.round_index, p.value])),
  });
  spark.append(values.join(' → ') || 'no rounds');
  const threshold = detail.unit.meta?.['threshold'];
  const caption =
    typeof threshold === 'number' ? `scores by round (threshold ${threshold})` : 'scores by round';
  return el('section', { class: 'score-history' }, [el('h3', {}, [caption]), spark]);
}

function collectEdited(root: HTMLElement): string[][] {
  const edited: string[][] = [];
  root.querySelectorAll<HTMLTextAreaElement>('textarea[data-field-name]').forEach((area) => {
    edited.push([area.dataset.fieldName ?? '', area.value]);
  });
  return edited;
}

export async function renderReviewScreen(
  root: HTMLElement,
  api: ReviewApi,
  taskId: string,
  reviewerTag: string,
  options: ReviewOptions = {},
): Promise<void> {
  clear(root);
  let detail: TaskDetail;
  try {
    detail = await api.getTask(taskId);
  } catch (err) {
    root.append(el('div', { class: 'banner error', role: 'alert' }, [String((err as Error).message)]));
    return;
  }

  const banner = el('div', { class: 'banner', role: 'status', hidden: 'hidden' });
  const showBanner = (text: string, kind: string) => {
    banner.textContent = text;
    banner.className = `banner ${kind}`;
    banner.removeAttribute('hidden');
  };

  root.append(
    el('header', { class: 'review-header' }, [
      el('h1', {}, [`Task ${detail.task.task_id}`]),
      el('span', { class: `badge reason-${detail.task.reason}` }, [detail.task.reason]),
      el('span', { class: 'unit-status', 'data-status': detail.unit.status }, [detail.unit.status]),
    ]),
    banner,
  );

  const english = detail.unit.english_fields;
  const arabic = detail.unit.arabic_fields ?? english.map(([name]) => [name ?? '', '']);

  const grid = el('div', { class: 'field-grid' });
  for (let i = 0; i < english.length; i += 1) {
    const [name, englishText] = english[i] ?? ['', ''];
    const arabicText = arabic[i]?.[1] ?? '';
    const left = el('div', { class: 'english-pane', dir: 'ltr', lang: 'en' }, [
      el('h4', {}, [name ?? '']),
      el('p', { class: 'english-text' }, [englishText ?? '']),
    ]);
    const area = el('textarea', {
      ...arabicPaneAttrs(),
      'data-field-name': name ?? '',
      rows: '3',
      'aria-label': `Arabic for ${name}`,
    });
    area.value = arabicText;
    const right = el('div', arabicPaneAttrs({ class: 'arabic-cell' }), [area]);
    grid.append(el('div', { class: 'field-row', 'data-field': name ?? '' }, [left, right]));
  }
  root.append(scoreHistory(detail), grid);

  const decide = async (verdict: 'approve' | 'edit' | 'reject') => {
    let edited: string[][] | undefined;
    if (verdict === 'edit') {
      edited = collectEdited(root);
      const problem = validateEditedFields(english, edited);
      if (problem) {
        showBanner(`Not submitted: ${problem}`, 'error');
        return;
      }
    }
    try {
      const result = await api.decide(taskId, verdict, reviewerTag, edited);
      showBanner(`Recorded ${verdict}; unit is now ${result.unit_status}.`, 'success');
      options.onDecided?.(taskId, result.unit_status);
    } catch (err) {
      if (err instanceof ApiError && err.code === 'already_decided') {
        // keep local edits on screen so the reviewer can copy them out
        showBanner('Task already decided by another reviewer.', 'error already-decided');
      } else {
        showBanner(`Decision failed: ${(err as Error).message}`, 'error');
      }
    }
  };

  const actions = el('div', { class: 'actions' });
  const buttons: [string, 'approve' | 'edit' | 'reject', string][] = [
    ['Approve (a)', 'approve', 'a'],
    ['Save as edit (e)', 'edit', 'e'],
    ['Reject (r)', 'reject', 'r'],
  ];
  for (const [label, verdict] of buttons) {
    const button = el('button', { class: `decide decide-${verdict}`, 'data-verdict': verdict }, [label]);
    button.addEventListener('click', () => void decide(verdict));
    actions.append(button);
  }
  root.append(actions);

  root.addEventListener('keydown', (event) => {
    const target = event.target as HTMLElement | null;
    if (target && target.tagName === 'TEXTAREA') return; // typing Arabic, not commanding
    const hit = buttons.find(([, , key]) => key === event.key);
    if (hit) void decide(hit[1]);
  });
}
