"""Transports for the session: newline-delimited JSON over stdio, and the
same messages over WebSocket.

Both carry one JSON object per message.  Requests are {id, verb, payload};
each gets exactly one {id, ok, ...} response.  Events ({event, revision,
payload}) are interleaved into the same stream as they happen.
"""

from __future__ import annotations

import asyncio
import json
import threading

from .session import Session


def _parse_request(line: str):
    """Returns (request, None) or (None, error_message)."""
    try:
        parsed = json.loads(line)
    except json.JSONDecodeError as exc:
        return None, f"not valid JSON: {exc.msg}"
    return parsed, None


def _bad_response(message: str) -> dict:
    return {"id": None, "ok": False,
            "error": {"type": "BadVerb", "message": message}}


def serve_stdio(session: Session, stdin, stdout) -> int:
    """Blocking request loop; returns the number of requests served."""
    write_lock = threading.Lock()

    def send(obj: dict):
        text = json.dumps(obj)
        with write_lock:
            stdout.write(text + "\n")
            stdout.flush()

    unsubscribe = session.subscribe(send)
    served = 0
    try:
        for line in stdin:
            line = line.strip()
            if not line:
                continue
            request, bad = _parse_request(line)
            if bad is not None:
                send(_bad_response(bad))
                continue
            send(session.handle(request))
            served += 1
    finally:
        unsubscribe()
        session.close()
    return served


async def _serve_connection(session: Session, socket):
    outbound: asyncio.Queue = asyncio.Queue()
    loop = asyncio.get_running_loop()

    def push_event(event: dict):
        loop.call_soon_threadsafe(outbound.put_nowait, event)

    unsubscribe = session.subscribe(push_event)

    async def pump():
        while True:
            await socket.send(json.dumps(await outbound.get()))

    sender = asyncio.create_task(pump())
    try:
        async for message in socket:
            request, bad = _parse_request(message)
            if bad is not None:
                response = _bad_response(bad)
            else:
                # The session lock lives in the handler; run it off the event
                # loop so slow verbs never stall other connections' events.
                response = await asyncio.to_thread(session.handle, request)
            outbound.put_nowait(response)
    finally:
        unsubscribe()
        sender.cancel()


async def serve_websocket(session: Session, host: str = "127.0.0.1",
                          port: int = 8765, ready=None):
    """Run a WebSocket endpoint until cancelled."""
    import websockets.asyncio.server

    async def handler(socket):
        await _serve_connection(session, socket)

    async with websockets.asyncio.server.serve(handler, host, port) as server:
        if ready is not None:
            bound = server.sockets[0].getsockname()[1] if server.sockets else port
            ready(bound)
        await asyncio.get_running_loop().create_future()  # run forever


def run_websocket_server(session: Session, host: str = "127.0.0.1",
                         port: int = 8765, ready=None):
    """Blocking entry point for the CLI's serve subcommand."""
    try:
        asyncio.run(serve_websocket(session, host, port, ready))
    except KeyboardInterrupt:
        pass
    finally:
        session.close()
