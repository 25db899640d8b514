import { App } from "./app";

/** Browser entry point. Connection parameters come from the query string
 * so the static page works against any server instance:
 *   index.html?host=127.0.0.1:8765&session=tv&user=1&token=dev-token
 * A full ws= URL overrides host/session/user/token.
 */
function channelUrl(search: string): string {
  const params = new URLSearchParams(search);
  const explicit = params.get("ws");
  if (explicit) return explicit;
  const host = params.get("host") ?? "127.0.0.1:8765";
  const session = params.get("session") ?? `ui-${Date.now().toString(36)}`;
  const user = params.get("user") ?? "1";
  const token = params.get("token") ?? "dev-token";
  const query = new URLSearchParams({ session, user, token });
  return `ws://${host}/ws?${query.toString()}`;
}

const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app mount point");
}
const app = new App({ root, url: channelUrl(window.location.search) });
app.start();
