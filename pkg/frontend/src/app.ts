/** Browser shell for the participant flow.
 *
 * Reads ?session=<id>&token=<participant token> from the URL, then
 * renders whatever screen the service prescribes. Forward-only: screens
 * are replaced, never stacked, and a submitted screen is gone for good.
 */

import { SessionClient } from "./api.js";
import { en } from "./locale.js";
import { renderSelector } from "./selector.js";
import { ParticipantFlow, type Screen, type TaskScreen } from "./taskFlow.js";

function requireElement(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

export async function startApp(baseUrl: string): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get("session");
  const token = params.get("token");
  const root = requireElement("app");
  if (!sessionId || !token) {
    root.innerHTML = `<p>Open this page with ?session=...&token=... from your invitation.</p>`;
    return;
  }
  const client = new SessionClient(baseUrl, token);
  const flow = new ParticipantFlow(client, sessionId);
  await showScreen(root, flow, await flow.currentScreen());
}

async function showScreen(root: HTMLElement, flow: ParticipantFlow, screen: Screen): Promise<void> {
  if (screen.kind === "complete") {
    if (!screen.finalized) {
      await flow.finalize();
    }
    root.innerHTML = `<p class="complete">${en.complete}</p>`;
    return;
  }

  if (screen.kind === "knowledge") {
    const buttons = en.knowledgeLevels
      .map((label, i) => `<button type="button" class="knowledge-option" data-level="${i + 1}">${label}</button>`)
      .join("");
    root.innerHTML = `
      <h2>${en.knowledgeTitle}</h2>
      <p class="question-text">${screen.questionText}</p>
      <p>${en.knowledgePrompt}</p>
      <div class="knowledge-options">${buttons}</div>`;
    root.querySelectorAll<HTMLButtonElement>(".knowledge-option").forEach((button) => {
      button.addEventListener("click", async () => {
        const next = await flow.submitKnowledge(screen, Number(button.dataset.level));
        await showScreen(root, flow, next);
      });
    });
    return;
  }

  renderTaskScreen(root, flow, screen);
}

function renderTaskScreen(root: HTMLElement, flow: ParticipantFlow, screen: TaskScreen): void {
  root.innerHTML = `
    <h2>${en.taskTitles[screen.task]}</h2>
    <p class="question-text">${screen.questionText}</p>
    <p>${en.taskPrompts[screen.task]}</p>
    <div id="selector">${renderSelector(screen.selection)}</div>
    <button type="button" id="submit" disabled>${en.submit}</button>`;

  const submit = requireElement("submit") as HTMLButtonElement;
  const selector = requireElement("selector");

  function attachOptionHandlers(): void {
    selector.querySelectorAll<HTMLButtonElement>(".grid-option").forEach((button) => {
      button.addEventListener("click", () => {
        screen.selection.selectIndex(Number(button.dataset.index));
        selector.innerHTML = renderSelector(screen.selection);
        attachOptionHandlers();
        submit.disabled = !screen.selection.canSubmit;
      });
    });
  }

  attachOptionHandlers();

  submit.addEventListener("click", async () => {
    submit.disabled = true;
    const next = await flow.submitTask(screen);
    await showScreen(root, flow, next);
  });
}
