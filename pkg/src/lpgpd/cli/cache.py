"""A small JSON file cache for norm results."""

import hashlib
import json
import os


def cache_key(command: str, content: str, **cfg) -> str:
    blob = json.dumps({"command": command, "content": hashlib.sha256(content.encode()).hexdigest(),
                       **cfg}, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


class ResultCache:
    def __init__(self, path):
        self.path = path
        self._data = None

    def _load(self):
        if self._data is None:
            self._data = {}
            if self.path and os.path.exists(self.path):
                try:
                    with open(self.path) as fh:
                        self._data = json.load(fh)
                except (OSError, ValueError):
                    self._data = {}
        return self._data

    def get(self, key):
        if not self.path:
            return None
        return self._load().get(key)

    def put(self, key, value):
        if not self.path:
            return
        data = self._load()
        data[key] = value
        tmp = self.path + ".tmp"
        with open(tmp, "w") as fh:
            json.dump(data, fh)
        os.replace(tmp, self.path)
