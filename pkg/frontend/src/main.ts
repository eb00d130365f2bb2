import { ApiClient } from "./api.js";
import { AppStore } from "./state.js";
import { App } from "./ui.js";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}
const store = new AppStore(new ApiClient(""));
new App(root, store);
