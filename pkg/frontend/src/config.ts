/** Build-time configuration: the service base URL (and the poll cadence). */

export interface UiConfig {
  serviceUrl: string;
  pollIntervalMs: number;
}

declare global {
  interface Window {
    CARBONMARKET_CONFIG?: Partial<UiConfig>;
  }
}

export const DEFAULT_CONFIG: UiConfig = {
  serviceUrl: "http://127.0.0.1:8545",
  pollIntervalMs: 2000,
};

export function resolveConfig(): UiConfig {
  const override = typeof window !== "undefined" ? window.CARBONMARKET_CONFIG ?? {} : {};
  return { ...DEFAULT_CONFIG, ...override };
}
