import itertools
import json
import logging

import pytest

from guidedog import assets
from guidedog.library import (
    EquivalenceGroups,
    LibraryError,
    is_equivalent,
    library_from_dict,
    load_library,
)

SEED_LIBRARY = assets.bundled_path("library", "tasks77")

TABLE_GROUPS = {
    "places_to_eat": {
        "food court", "cafeteria", "restaurant", "dining hall", "shawarma joint",
        "cafe", "vending machine", "food truck", "fast food restaurant",
    },
    "restroom": {"restroom", "bathroom", "the loo"},
    "change_floor": {"elevator/stairs", "elevator/escalator", "elevator"},
    "cut_hair": {"barber shop", "salon"},
}


class TestLoadLibrary:
    def test_seed_library_loads_77_tasks(self):
        tasks, groups = load_library(SEED_LIBRARY)
        assert len(tasks) == 77
        for group_id, members in TABLE_GROUPS.items():
            assert groups.members(group_id) == frozenset(members)

    def test_seed_library_contains_planner_pairs_verbatim(self):
        tasks, _ = load_library(SEED_LIBRARY)
        pairs = {(t.location, t.purpose) for t in tasks if not t.synthetic}
        assert pairs == {
            ("elevator", "I want to go to the 2nd floor"),
            ("water fountain", "I want something to drink"),
            ("waiting room", "I want to sit down"),
        }

    def test_synthetic_tasks_are_tagged(self):
        tasks, _ = load_library(SEED_LIBRARY)
        assert sum(1 for t in tasks if t.synthetic) == 74

    def test_empty_library_is_valid(self):
        tasks, groups = library_from_dict({"groups": {}, "tasks": []})
        assert tasks == []
        assert groups.groups == {}

    def test_duplicates_dropped_with_warning(self, caplog):
        data = {
            "groups": {},
            "tasks": [
                {"location": "cafe", "purpose": "coffee"},
                {"location": "Cafe", "purpose": "coffee"},
                {"location": "cafe", "purpose": "tea"},
            ],
        }
        with caplog.at_level(logging.WARNING, logger="guidedog.library"):
            tasks, _ = library_from_dict(data)
        assert len(tasks) == 2
        assert "1 duplicate" in caplog.text

    def test_schema_errors_locate_the_entry(self):
        with pytest.raises(LibraryError, match=r"tasks\[1\]"):
            library_from_dict(
                {"groups": {}, "tasks": [{"location": "cafe", "purpose": "x"}, {"location": "cafe"}]}
            )

    def test_unknown_group_reference(self):
        with pytest.raises(LibraryError, match="unknown group"):
            library_from_dict(
                {"groups": {}, "tasks": [{"location": "cafe", "purpose": "x", "group": "nope"}]}
            )

    def test_location_in_two_groups_rejected(self):
        with pytest.raises(LibraryError, match="appears in groups"):
            library_from_dict({"groups": {"a": ["spot"], "b": ["spot"]}, "tasks": []})

    def test_parse_error_reports_line(self, tmp_path):
        path = tmp_path / "lib.json"
        path.write_text('{\n "groups": oops\n}')
        with pytest.raises(LibraryError, match="line 2"):
            load_library(str(path))


@pytest.fixture(scope="module")
def groups():
    return load_library(SEED_LIBRARY)[1]


class TestIsEquivalent:
    def test_restroom_group(self, groups):
        assert is_equivalent("bathroom", "restroom", groups)
        assert is_equivalent("bathroom", "the loo", groups)

    def test_reflexive_and_case_insensitive(self, groups):
        assert is_equivalent("kitchen", "kitchen", groups)
        assert is_equivalent("Kitchen", "kitchen", groups)

    def test_across_groups_is_false(self, groups):
        assert not is_equivalent("bathroom", "cafeteria", groups)
        assert not is_equivalent("salon", "elevator", groups)

    def test_ungrouped_names_only_match_themselves(self, groups):
        assert is_equivalent("water fountain", "water fountain", groups)
        assert not is_equivalent("water fountain", "kitchen", groups)

    def test_symmetry_exhaustive(self, groups):
        names = sorted(set(itertools.chain.from_iterable(groups.groups.values())))
        names += ["water fountain", "kitchen"]
        for a, b in itertools.product(names, repeat=2):
            assert is_equivalent(a, b, groups) == is_equivalent(b, a, groups)

    def test_transitive_within_groups(self, groups):
        for members in groups.groups.values():
            for a, b, c in itertools.product(sorted(members), repeat=3):
                if is_equivalent(a, b, groups) and is_equivalent(b, c, groups):
                    assert is_equivalent(a, c, groups)
