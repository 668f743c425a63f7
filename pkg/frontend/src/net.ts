// Thin WebSocket wrapper: parse the query-string config, connect, hand every
// inbound frame to the state layer.

export interface NetConfig {
  host: string;
  port: number;
  rateHz: number;
}

export function configFromQuery(search: string): NetConfig {
  const params = new URLSearchParams(search);
  return {
    host: params.get("host") ?? "127.0.0.1",
    port: Number(params.get("port") ?? 8077),
    rateHz: Number(params.get("rate") ?? 100),
  };
}

export function connect(config: NetConfig, handlers: {
  onOpen?: () => void;
  onMessage: (raw: string) => void;
  onClose?: () => void;
}): WebSocket {
  const ws = new WebSocket(`ws://${config.host}:${config.port}`);
  ws.onopen = () => handlers.onOpen?.();
  ws.onmessage = (ev) => {
    if (typeof ev.data === "string") handlers.onMessage(ev.data);
  };
  ws.onclose = () => handlers.onClose?.();
  ws.onerror = () => handlers.onClose?.();
  return ws;
}
