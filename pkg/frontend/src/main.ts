import { ApiClient } from "./api.js";
import { ChatController } from "./controller.js";
import { render } from "./view.js";

const root = document.body;
const api = new ApiClient("");
const controller = new ChatController(api, (state) => render(state, root));

const form = root.querySelector("#composer") as HTMLFormElement;
const input = root.querySelector("#message") as HTMLInputElement;

form.addEventListener("submit", (ev) => {
  ev.preventDefault();
  const text = input.value;
  input.value = "";
  void controller.send(text);
});

(root.querySelector("#new-chat") as HTMLButtonElement).addEventListener("click", () => {
  void controller.startConversation();
});

void controller.startConversation();
