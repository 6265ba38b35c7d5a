from __future__ import annotations

from pathlib import Path

import pytest

from vopol import load_model, parse_policy_document

FIXTURES = Path(__file__).parent / "fixtures"

VISITUS = """\
vo VisitUs
param n 3
member Hotel kind=Partner cap beds=10 cost=5
candidate newHotel kind=Partner cap beds=8 cost=4
task BookFlight type=Atomic
task HotelProv type=Atomic requires beds=3
edge BookFlight HotelProv
"""

MOREBEDS = """\
policy MoreBeds
  appliesTo HotelProv
  when task_entry()
  if not has_capacity(Hotel, beds, n)
  do change_type(HotelProv, Replicable, competition)
     andthen add_member(newHotel)
     andthen assign_duty(newHotel, beds)
"""


@pytest.fixture
def visitus():
    return load_model(VISITUS)


@pytest.fixture
def morebeds():
    return parse_policy_document(MOREBEDS)
