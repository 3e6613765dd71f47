// Transport boundary: one protocol line per message, in both directions.

export interface Transport {
    send(line: string): void;
    close(): void;
    onLine(handler: (line: string) => void): void;
    onClose(handler: () => void): void;
    onOpen(handler: () => void): void;
}

export class WebSocketTransport implements Transport {
    private ws: WebSocket;
    private lineHandler: (line: string) => void = () => undefined;
    private closeHandler: () => void = () => undefined;
    private openHandler: () => void = () => undefined;

    constructor(url: string) {
        this.ws = new WebSocket(url);
        this.ws.onmessage = (ev) => this.lineHandler(String(ev.data));
        this.ws.onclose = () => this.closeHandler();
        this.ws.onopen = () => this.openHandler();
    }

    send(line: string): void {
        this.ws.send(line);
    }

    close(): void {
        this.ws.close();
    }

    onLine(handler: (line: string) => void): void {
        this.lineHandler = handler;
    }

    onClose(handler: () => void): void {
        this.closeHandler = handler;
    }

    onOpen(handler: () => void): void {
        this.openHandler = handler;
    }
}
