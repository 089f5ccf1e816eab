/** Browser entry point: mount the studio against the same-origin serve API. */

import { ServeApi } from "./api.js";
import { StudioApp } from "./app.js";

const root = document.getElementById("studio-root");
if (!root) {
  throw new Error("missing #studio-root element");
}
const app = new StudioApp(root, new ServeApi(""));
void app.init();
