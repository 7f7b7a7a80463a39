import { ChatApp } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const app = new ChatApp(root);
  void app.start();
  const goalInput = document.getElementById("goal-file") as HTMLInputElement | null;
  goalInput?.addEventListener("change", () => {
    const file = goalInput.files?.[0];
    if (!file) return;
    void file.text().then((text) => app.loadGoal(text));
  });
}
