"""Validates every corpus presentation against docs/presentation.schema.json."""
import glob
import json
import os
import sys

import jsonschema

root = sys.argv[1]
schema = json.load(open(os.path.join(root, "docs", "presentation.schema.json")))
jsonschema.Draft202012Validator.check_schema(schema)
validator = jsonschema.Draft202012Validator(schema)
failed = 0
for path in sorted(glob.glob(os.path.join(root, "corpus", "*.json"))):
    if os.path.basename(path) == "coverage.json":
        continue
    for e in validator.iter_errors(json.load(open(path))):
        print(f"{os.path.basename(path)}: {'/'.join(map(str, e.path))}: {e.message}")
        failed += 1
print(f"{failed} schema errors")
sys.exit(1 if failed else 0)
