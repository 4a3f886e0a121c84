"""Drive the session service the way an external tool would: spawn the
stdio server as a subprocess and talk newline-delimited JSON to it.

    python3 demos/06_service_client.py

Nothing is written to disk; the point is the protocol round trip:
requests get matching responses, and events (model changes, simulation
progress) arrive interleaved on the same stream.
"""

import json
import subprocess
import sys


class StdioClient:
    def __init__(self):
        self.proc = subprocess.Popen(
            [sys.executable, "-m", "pnet.cli", "serve", "--stdio"],
            stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True)
        self.next_id = 1
        self.events = []

    def call(self, verb, **payload):
        """Send one request; collect events until its response arrives."""
        rid = self.next_id
        self.next_id += 1
        self.proc.stdin.write(json.dumps(
            {"id": rid, "verb": verb, "payload": payload}) + "\n")
        self.proc.stdin.flush()
        while True:
            message = json.loads(self.proc.stdout.readline())
            if message.get("id") == rid:
                if not message["ok"]:
                    raise RuntimeError(message["error"]["message"])
                return message["payload"]
            self.events.append(message)
            kind = message.get("event")
            if kind == "sim-progress":
                done, total = message["payload"]["done"], message["payload"]["total"]
                print(f"  progress {done}/{total}")
            elif kind:
                print(f"  event: {kind} (revision {message['revision']})")

    def wait_for(self, kind):
        while True:
            message = json.loads(self.proc.stdout.readline())
            self.events.append(message)
            name = message.get("event")
            if name == "sim-progress":
                print(f"  progress {message['payload']['done']}"
                      f"/{message['payload']['total']}")
            elif name:
                print(f"  event: {name}")
            if name == kind:
                return message["payload"]

    def close(self):
        self.proc.stdin.close()
        self.proc.wait(timeout=30)


def main():
    client = StdioClient()
    try:
        print("building an instrument through script.run ...")
        result = client.call("script.run", source="""
            set m [tuned_oscillator 330 /note]
            pluck $m 0.8
        """)
        print(f"  script result: {result['result']!r} "
              f"(revision {result['revision']})")

        stats = client.call("info.stats")
        print(f"  model now has {stats['model']['modules']} modules")

        print("simulating half a second in the background ...")
        client.call("sim.start", duration=22050)
        finished = client.wait_for("sim-finished")
        print(f"  channels: {finished['channels']}, "
              f"{finished['stats']['steps']} steps")

        wave = client.call("result.wave", channel=finished["channels"][0],
                           start=0, count=8)
        head = ", ".join(f"{v:.3f}" for v in wave["samples"])
        print(f"  first samples of {wave['channel']}: {head}")
        print(f"  total {wave['total']} samples at {wave['rate']} Hz")
    finally:
        client.close()


if __name__ == "__main__":
    main()
