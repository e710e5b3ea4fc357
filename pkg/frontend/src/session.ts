/**
 * One user's editing session against one project.
 *
 * Tracks the last seen revision, buffers pending edits, and turns stale-
 * revision conflicts into an explicit reload-and-merge prompt. A conflicted
 * edit stays in the buffer until the user resolves it; the session never
 * retries with a fresher revision on its own (that would be a silent
 * overwrite).
 */

import { ApiClient, ConflictError } from "./api.js";

export interface PendingEdit {
  id: number;
  description: string;
  submit: (expectedRevision: number) => Promise<{ revision: number }>;
}

export interface ConflictPrompt {
  message: string;
  staleRevision: number;
  currentRevision: number;
  editDescription: string;
  options: readonly ["reload-and-merge", "discard-edit"];
}

export type EditOutcome =
  | { kind: "applied"; revision: number }
  | { kind: "conflict"; prompt: ConflictPrompt };

export class UiSession {
  lastSeenRevision = 0;
  asOf: string;
  conflictPrompt: ConflictPrompt | null = null;
  readonly pendingEdits: PendingEdit[] = [];
  private editCounter = 0;

  constructor(
    readonly api: ApiClient,
    readonly projectLabel: string,
    asOf?: string,
  ) {
    this.asOf = asOf ?? new Date().toISOString().slice(0, 10);
  }

  async connect(): Promise<void> {
    this.lastSeenRevision = await this.api.getRevision();
  }

  queueEdit(description: string, submit: PendingEdit["submit"]): PendingEdit {
    const edit: PendingEdit = { id: ++this.editCounter, description, submit };
    this.pendingEdits.push(edit);
    return edit;
  }

  /** Submit one edit, carrying the last seen revision. */
  async submitEdit(edit: PendingEdit): Promise<EditOutcome> {
    try {
      const { revision } = await edit.submit(this.lastSeenRevision);
      this.lastSeenRevision = revision;
      this.drop(edit);
      return { kind: "applied", revision };
    } catch (error) {
      if (error instanceof ConflictError) {
        const prompt: ConflictPrompt = {
          message:
            `The project changed while you were editing (you saw revision ` +
            `${this.lastSeenRevision}, the service is at ${error.currentRevision}). ` +
            `Reload the latest state and merge your edit; it was not applied.`,
          staleRevision: this.lastSeenRevision,
          currentRevision: error.currentRevision,
          editDescription: edit.description,
          options: ["reload-and-merge", "discard-edit"],
        };
        this.conflictPrompt = prompt;
        return { kind: "conflict", prompt };
      }
      throw error;
    }
  }

  /** Convenience: queue and immediately submit. */
  submit(description: string, submit: PendingEdit["submit"]): Promise<EditOutcome> {
    return this.submitEdit(this.queueEdit(description, submit));
  }

  /** Resolve a conflict by adopting the service's revision; the pending edit
   * stays buffered for the user to merge and resubmit. */
  async reloadAndMerge(): Promise<void> {
    this.lastSeenRevision = await this.api.getRevision();
    this.conflictPrompt = null;
  }

  discardConflictedEdit(): void {
    if (this.conflictPrompt === null) return;
    const description = this.conflictPrompt.editDescription;
    const edit = this.pendingEdits.find((e) => e.description === description);
    if (edit) this.drop(edit);
    this.conflictPrompt = null;
  }

  private drop(edit: PendingEdit): void {
    const index = this.pendingEdits.indexOf(edit);
    if (index >= 0) this.pendingEdits.splice(index, 1);
  }
}
