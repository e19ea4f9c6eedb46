/**
 * Question flow: one pending question at a time, form typed by answer kind,
 * client-side validation before any request, optimistic-concurrency recovery.
 *
 * A 409 never overwrites silently: the panel refetches server state, keeps
 * the expert's form content, and asks for explicit confirmation before
 * resubmitting at the new revision.
 */

import { AnswerSubmission, AnswerValue, Api, ApiError, QuestionItem } from "./api.js";
import { ViewState } from "./state.js";

const INTERFACE_KINDS = ["NETWORK_SIGNAL", "ANALOG", "MECHANICAL"];
const DATA_FORMATS = ["NETWORK_SIGNAL", "ECU_MEMORY", "OTHER"];

export class QuestionFlow {
  private current: QuestionItem | null = null;
  private readonly counter: HTMLElement;
  private readonly prompt: HTMLElement;
  private readonly form: HTMLElement;
  private readonly feedback: HTMLElement;
  private readonly conflict: HTMLElement;
  private readonly authorInput: HTMLInputElement;

  constructor(
    root: HTMLElement,
    private readonly api: Api,
    private readonly state: ViewState,
    private readonly onAccepted: (newRevision: number) => Promise<void>,
    private readonly onError: (message: string) => void,
  ) {
    root.innerHTML = "";
    this.counter = el("div", "pending-counter");
    this.prompt = el("div", "question-prompt");
    this.form = el("form", "answer-form");
    this.feedback = el("div", "validation-feedback");
    this.conflict = el("div", "conflict-banner");
    this.conflict.hidden = true;
    this.authorInput = document.createElement("input");
    this.authorInput.className = "author-input";
    this.authorInput.value = "expert";
    const authorLabel = el("label", "author-label");
    authorLabel.textContent = "author ";
    authorLabel.appendChild(this.authorInput);
    root.append(this.counter, authorLabel, this.prompt, this.form, this.feedback, this.conflict);
  }

  async refresh(): Promise<void> {
    let payload;
    try {
      payload = await this.api.questions("pending");
    } catch (error) {
      this.onError(error instanceof ApiError ? error.message : "API unreachable");
      return;
    }
    const queue = this.state.applyStepFilter(this.state.prioritize(payload.questions));
    this.state.pendingQueue = queue;
    this.counter.textContent = `${payload.total} questions pending`;
    this.counter.dataset.pending = String(payload.total);
    const keepCurrent =
      this.current && queue.some((q) => q.id === this.current?.id) ? this.current : null;
    this.show(keepCurrent ?? queue[0] ?? null);
  }

  private show(question: QuestionItem | null): void {
    this.current = question;
    this.form.innerHTML = "";
    this.feedback.textContent = "";
    this.conflict.hidden = true;
    if (!question) {
      this.prompt.textContent = "No pending questions.";
      return;
    }
    this.prompt.innerHTML = "";
    const step = el("span", "question-step");
    step.textContent = `${question.step} · ${question.target}`;
    const context = el("div", "question-context");
    context.textContent = question.target_description;
    const text = el("div", "question-text");
    text.textContent = question.prompt;
    this.prompt.append(step, context, text);
    this.buildForm(question.answer_kind);

    const submit = document.createElement("button");
    submit.type = "submit";
    submit.className = "submit-answer";
    submit.textContent = "submit";
    this.form.appendChild(submit);
    (this.form as HTMLFormElement).onsubmit = (event) => {
      event.preventDefault();
      void this.submit();
    };
  }

  private buildForm(kind: string): void {
    switch (kind) {
      case "TEXT": {
        const area = document.createElement("textarea");
        area.name = "text";
        this.form.appendChild(area);
        break;
      }
      case "BOOLEAN": {
        this.form.appendChild(namedSelect("bool", ["yes", "no"]));
        break;
      }
      case "DURATION_LIMITS": {
        this.form.appendChild(numberInput("min_ms", "min (ms)"));
        this.form.appendChild(numberInput("max_ms", "max (ms)"));
        break;
      }
      case "INTERFACE_SPEC": {
        this.form.appendChild(textInput("if_id", "interface id"));
        this.form.appendChild(namedSelect("if_kind", INTERFACE_KINDS));
        this.form.appendChild(textInput("if_description", "description"));
        this.form.appendChild(numberInput("if_frequency", "frequency (Hz), optional"));
        this.form.appendChild(textInput("if_granularity", "granularity, optional"));
        break;
      }
      case "DATA_NEED": {
        this.form.appendChild(textInput("data_item", "data item"));
        this.form.appendChild(namedSelect("data_format", DATA_FORMATS));
        break;
      }
      default:
        this.form.appendChild(textInput("text", "answer"));
    }
  }

  /** null means validation failed; the message is already on screen. */
  private collectValue(kind: string): AnswerValue | null {
    const field = (name: string): string =>
      (this.form.querySelector(`[name="${name}"]`) as HTMLInputElement | null)?.value ?? "";
    switch (kind) {
      case "TEXT":
        return field("text");
      case "BOOLEAN":
        return field("bool") === "yes";
      case "DURATION_LIMITS": {
        const min = Number(field("min_ms"));
        const max = Number(field("max_ms"));
        if (field("min_ms") === "" || field("max_ms") === "" || Number.isNaN(min) || Number.isNaN(max)) {
          this.fail("both duration bounds are required");
          return null;
        }
        if (min > max) {
          this.fail("min must not exceed max");
          return null;
        }
        return { min_ms: min, max_ms: max };
      }
      case "INTERFACE_SPEC": {
        if (!field("if_id")) {
          this.fail("interface id is required");
          return null;
        }
        const frequency = field("if_frequency");
        return {
          id: field("if_id"),
          kind: field("if_kind"),
          description: field("if_description"),
          signal_frequency_hz: frequency === "" ? null : Number(frequency),
          granularity: field("if_granularity") || null,
        };
      }
      case "DATA_NEED": {
        if (!field("data_item")) {
          this.fail("data item is required");
          return null;
        }
        return { data_item: field("data_item"), format: field("data_format") };
      }
      default:
        return field("text");
    }
  }

  private fail(message: string): void {
    this.feedback.textContent = message;
    this.feedback.dataset.kind = "validation";
  }

  async submit(): Promise<void> {
    if (!this.current) return;
    const value = this.collectValue(this.current.answer_kind);
    if (value === null) return; // invalid: no request leaves the client
    const answer: AnswerSubmission = {
      question_id: this.current.id,
      kind: this.current.answer_kind,
      value,
      author: this.authorInput.value || "expert",
      timestamp: new Date().toISOString(),
    };
    let result;
    try {
      result = await this.api.postAnswer(answer, this.state.revision);
    } catch (error) {
      this.onError(error instanceof ApiError ? error.message : "API unreachable");
      return;
    }
    if (result.kind === "stale") {
      await this.enterConflict(result.current_revision, answer);
      return;
    }
    this.feedback.textContent = "saved";
    this.feedback.dataset.kind = "saved";
    await this.onAccepted(result.new_revision);
  }

  /** Refetch, keep the form content, ask the expert before replaying. */
  private async enterConflict(currentRevision: number, answer: AnswerSubmission): Promise<void> {
    this.state.revision = currentRevision;
    this.conflict.hidden = false;
    this.conflict.innerHTML = "";
    const note = el("span", "conflict-note");
    note.textContent =
      `Another session moved the project to revision ${currentRevision}. ` +
      "Your entry was kept; review and resubmit.";
    const resubmit = document.createElement("button");
    resubmit.type = "button";
    resubmit.className = "conflict-resubmit";
    resubmit.textContent = "resubmit";
    resubmit.addEventListener("click", () => {
      this.conflict.hidden = true;
      void this.replay(answer);
    });
    this.conflict.append(note, resubmit);
  }

  private async replay(answer: AnswerSubmission): Promise<void> {
    let result;
    try {
      result = await this.api.postAnswer(answer, this.state.revision);
    } catch (error) {
      this.onError(error instanceof ApiError ? error.message : "API unreachable");
      return;
    }
    if (result.kind === "stale") {
      await this.enterConflict(result.current_revision, answer);
      return;
    }
    this.feedback.textContent = "saved after conflict";
    this.feedback.dataset.kind = "saved";
    await this.onAccepted(result.new_revision);
  }
}

function el(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}

function textInput(name: string, placeholder: string): HTMLElement {
  const input = document.createElement("input");
  input.type = "text";
  input.name = name;
  input.placeholder = placeholder;
  return input;
}

function numberInput(name: string, placeholder: string): HTMLElement {
  const input = document.createElement("input");
  input.type = "number";
  input.name = name;
  input.placeholder = placeholder;
  return input;
}

function namedSelect(name: string, options: string[]): HTMLSelectElement {
  const dropdown = document.createElement("select");
  dropdown.name = name;
  for (const option of options) {
    const entry = document.createElement("option");
    entry.value = option;
    entry.textContent = option;
    dropdown.appendChild(entry);
  }
  return dropdown;
}
