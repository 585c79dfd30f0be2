from __future__ import annotations

import threading

import pytest

from bigboard.scenario import ANALYSTS, MANAGER, fixture_topology, make_boston_fixture
from bigboard.server import BoardHTTPServer, BoardServer
from bigboard.state import BoardState, ClientIdentity, Command

MANAGER_TOKEN = "test-manager-token"
MEMBER_TOKEN = "test-member-token"


@pytest.fixture(scope="session")
def topo():
    return fixture_topology()


@pytest.fixture(scope="session")
def boston_commands():
    return make_boston_fixture()


@pytest.fixture
def boston_state(topo, boston_commands):
    state = BoardState(topo)
    for command in boston_commands:
        state.apply(command)
    return state


@pytest.fixture
def fresh_state(topo):
    return BoardState(topo)


@pytest.fixture
def manager():
    return MANAGER


@pytest.fixture
def analyst():
    return ANALYSTS[0]


class CommandFactory:
    """Builds well-formed commands with unique ids and a ticking clock."""

    def __init__(self):
        self.n = 0
        self.at = 1356998400000

    def __call__(self, kind: str, payload: dict, issuer: ClientIdentity = ANALYSTS[0]) -> Command:
        self.n += 1
        self.at += 1000
        return Command(
            command_id=f"test-{self.n:05d}",
            issuer=issuer,
            kind=kind,
            payload=payload,
            at=self.at,
        )


@pytest.fixture
def mk():
    return CommandFactory()


class HttpBoard:
    def __init__(self, topo, journal=None):
        self.board = BoardServer(topo, journal)
        self.httpd = BoardHTTPServer(("127.0.0.1", 0), self.board, MANAGER_TOKEN, MEMBER_TOKEN)
        self.addr = f"127.0.0.1:{self.httpd.server_address[1]}"
        self.thread = threading.Thread(
            target=lambda: self.httpd.serve_forever(poll_interval=0.05), daemon=True
        )
        self.thread.start()

    def stop(self):
        self.httpd.shutdown()
        self.httpd.server_close()
        self.board.close()
        self.thread.join(timeout=5)


@pytest.fixture
def http_board(topo):
    hb = HttpBoard(topo)
    yield hb
    hb.stop()
