/**
 * Queue screen: filterable task list with live counts. Clicking a row (or
 * pressing Enter on it) navigates to the side-by-side review screen.
 */

import { ReviewApi, Task, TaskFilter } from './api.js';
import { clear, el } from './dom.js';

export interface QueueOptions {
  filter?: TaskFilter;
  onOpenTask?: (taskId: string) => void;
}

function reasonBadge(task: Task): HTMLElement {
  const label = task.reason === 'random_audit' ? 'audit' : 'low score';
  return el('span', { class: `badge reason-${task.reason}` }, [label]);
}

function taskRow(task: Task, onOpen: (taskId: string) => void): HTMLElement {
  const row = el('tr', { class: `task-row state-${task.state}`, tabindex: '0', 'data-task-id': task.task_id }, [
    el('td', {}, [task.task_id]),
    el('td', {}, [reasonBadge(task)]),
    el('td', {}, [task.state]),
    el('td', {}, [task.claimed_by ?? '']),
  ]);
  row.addEventListener('click', () => onOpen(task.task_id));
  row.addEventListener('keydown', (event) => {
    if (event.key === 'Enter') onOpen(task.task_id);
  });
  return row;
}

export async function renderQueueScreen(
  root: HTMLElement,
  api: ReviewApi,
  options: QueueOptions = {},
): Promise<void> {
  clear(root);
  const onOpen = options.onOpenTask ?? ((taskId: string) => {
    window.location.hash = `#/tasks/${taskId}`;
  });

  let page;
  let stats;
  try {
    [page, stats] = await Promise.all([api.listTasks(options.filter ?? {}), api.stats()]);
  } catch (err) {
    const banner = el('div', { class: 'banner error', role: 'alert' }, [
      'Review service unreachable. ',
    ]);
    const retry = el('button', { class: 'retry' }, ['Retry']);
    retry.addEventListener('click', () => void renderQueueScreen(root, api, options));
    banner.append(retry);
    root.append(banner);
    return;
  }

  const header = el('header', { class: 'queue-header' }, [
    el('h1', {}, ['Review queue']),
    el('span', { class: 'count-badge', 'data-count': String(page.total) }, [String(page.total)]),
    el('span', { class: 'queue-depth' }, [`${stats.queue_depth} awaiting decision`]),
  ]);
  root.append(header);

  const filterBar = el('div', { class: 'filter-bar' });
  const stateSelect = el('select', { 'data-filter': 'state' }, []);
  for (const value of ['', 'open', 'claimed', 'decided']) {
    const option = el('option', { value }, [value || 'any state']);
    if ((options.filter?.state ?? '') === value) option.selected = true;
    stateSelect.append(option);
  }
  const reasonSelect = el('select', { 'data-filter': 'reason' }, []);
  for (const value of ['', 'below_threshold', 'random_audit']) {
    const option = el('option', { value }, [value || 'any reason']);
    if ((options.filter?.reason ?? '') === value) option.selected = true;
    reasonSelect.append(option);
  }
  const applyFilter = () => {
    const filter: TaskFilter = {};
    if (stateSelect.value) filter.state = stateSelect.value;
    if (reasonSelect.value) filter.reason = reasonSelect.value;
    void renderQueueScreen(root, api, { ...options, filter });
  };
  stateSelect.addEventListener('change', applyFilter);
  reasonSelect.addEventListener('change', applyFilter);
  filterBar.append(stateSelect, reasonSelect);
  root.append(filterBar);

  if (page.tasks.length === 0) {
    root.append(el('p', { class: 'empty-state' }, ['No tasks match this filter. All caught up.']));
    return;
  }

  const table = el('table', { class: 'task-table' }, [
    el('thead', {}, [
      el('tr', {}, [
        el('th', {}, ['task']),
        el('th', {}, ['reason']),
        el('th', {}, ['state']),
        el('th', {}, ['claimed by']),
      ]),
    ]),
  ]);
  const body = el('tbody');
  for (const task of page.tasks) {
    body.append(taskRow(task, onOpen));
  }
  table.append(body);
  root.append(table);
}
