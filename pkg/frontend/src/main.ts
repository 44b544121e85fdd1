import { ApiClient } from "./api.js";
import { resolveConfig } from "./config.js";
import { Store } from "./store.js";
import { mount } from "./ui.js";

export function bootstrap(root: HTMLElement): Store {
  const config = resolveConfig();
  const store = new Store(new ApiClient(config.serviceUrl), config.pollIntervalMs);
  mount(root, store);
  store.startPolling();
  void store.refresh();
  return store;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  bootstrap(document.getElementById("app")!);
}
