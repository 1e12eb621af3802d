export { mount, Widget, WidgetOptions } from "./widget.js";
export { GatewayClient, GatewayError } from "./client.js";
export { SeqBuffer, WireMessage } from "./wire.js";
