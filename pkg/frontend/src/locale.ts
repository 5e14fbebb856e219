/** Externalized UI strings. Ships English; swap the table for other locales. */

export interface Strings {
  taskTitles: Record<string, string>;
  taskPrompts: Record<string, string>;
  knowledgeTitle: string;
  knowledgePrompt: string;
  knowledgeLevels: string[];
  submit: string;
  finish: string;
  complete: string;
  awaitingOutcomes: string;
}

export const en: Strings = {
  taskTitles: {
    A: "Task 1 of 4",
    B: "Task 2 of 4",
    C: "Task 3 of 4",
    D: "Task 4 of 4",
  },
  taskPrompts: {
    A: "How likely is it that the decision maker takes the action in the given period?",
    B: "What is the minimum chance of success at which the decision maker would take the action?",
    C: "If the decision maker takes the action, how likely is it to succeed?",
    D: "Having thought it through, how likely is it that the decision maker takes the action?",
  },
  knowledgeTitle: "Before the next question",
  knowledgePrompt: "How would you rate your knowledge of this topic?",
  knowledgeLevels: ["Very low", "Low", "Moderate", "High", "Very high"],
  submit: "Submit answer",
  finish: "Finish session",
  complete: "All questions answered. Thank you!",
  awaitingOutcomes: "awaiting outcomes",
};
