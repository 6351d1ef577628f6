"""Validates a recorded protocol transcript against the shared wire schema."""

import json
import sys

import jsonschema


def main(schema_path, transcript_path):
    schema = json.load(open(schema_path))
    client = {"$ref": "#/definitions/client_message", "definitions": schema["definitions"]}
    server = {"$ref": "#/definitions/server_message", "definitions": schema["definitions"]}
    counts = {"c2s": 0, "s2c": 0}
    with open(transcript_path) as f:
        for n, line in enumerate(f, 1):
            entry = json.loads(line)
            target = client if entry["dir"] == "c2s" else server
            try:
                jsonschema.validate(entry["msg"], target)
            except jsonschema.ValidationError as e:
                print(f"line {n} ({entry['dir']}): {e.message}")
                return 1
            counts[entry["dir"]] += 1
    print(f"validated {counts['c2s']} client and {counts['s2c']} server messages")
    return 0 if counts["c2s"] and counts["s2c"] else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv[1], sys.argv[2]))
