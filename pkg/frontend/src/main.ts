import { AssemblyApi, apiBaseFromLocation } from "./api.js";
import { mount } from "./ui.js";

const api = new AssemblyApi(apiBaseFromLocation(window.location.search));
const app = mount(document, api);
void app.start();
