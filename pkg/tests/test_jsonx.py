import json
import random
import string

import pytest

from bookforge.errors import MalformedJson, NoJsonFound
from bookforge.jsonx import extract_json


class TestExtractJson:
    def test_fenced_block(self):
        assert extract_json('```json\n{"a":1}\n```') == {"a": 1}

    def test_fence_without_language_tag(self):
        assert extract_json('```\n{"a": [1, 2]}\n```') == {"a": [1, 2]}

    def test_prose_prefix(self):
        raw = 'Here is the outline: {"title":"X","parts":[]}'
        assert extract_json(raw) == {"title": "X", "parts": []}

    def test_prose_suffix(self):
        raw = '{"n": 3} hope that helps!'
        assert extract_json(raw) == {"n": 3}

    def test_no_braces(self):
        with pytest.raises(NoJsonFound):
            extract_json("no braces here")

    def test_malformed_reports_byte_offset(self):
        raw = 'prefix {"a": }'
        with pytest.raises(MalformedJson) as err:
            extract_json(raw)
        assert err.value.byte_offset == len("prefix ")

    def test_first_valid_object_wins(self):
        raw = '{"broken": } then {"ok": true}'
        assert extract_json(raw) == {"ok": True}

    def test_nested_objects_return_outermost(self):
        raw = 'x {"outer": {"inner": 1}} y'
        assert extract_json(raw) == {"outer": {"inner": 1}}

    def test_array_payload(self):
        assert extract_json("list: [1, 2, 3]") == [1, 2, 3]

    def test_multibyte_prefix_offset(self):
        raw = "préfixe {oops"
        with pytest.raises(MalformedJson) as err:
            extract_json(raw)
        assert err.value.byte_offset == len("préfixe ".encode("utf-8"))

    def test_round_trip_random_json(self):
        rng = random.Random(11)

        def rand_value(depth=0):
            kinds = ["int", "str", "bool", "null"]
            if depth < 3:
                kinds += ["list", "dict", "dict"]
            kind = rng.choice(kinds)
            if kind == "int":
                return rng.randint(-1000, 1000)
            if kind == "str":
                return "".join(
                    rng.choice(string.ascii_letters + " {}[]:,\"'")
                    for _ in range(rng.randint(0, 12))
                )
            if kind == "bool":
                return rng.random() < 0.5
            if kind == "null":
                return None
            if kind == "list":
                return [rand_value(depth + 1) for _ in range(rng.randint(0, 4))]
            return {
                f"k{i}": rand_value(depth + 1) for i in range(rng.randint(1, 4))
            }

        for i in range(200):
            value = {"payload": rand_value()}
            wrapper = rng.choice(
                [
                    "{json}",
                    "```json\n{json}\n```",
                    "Some chatter first.\n{json}\nTrailing remark.",
                    "Result: {json}",
                ]
            )
            raw = wrapper.replace("{json}", json.dumps(value))
            assert extract_json(raw) == value
