import datetime

from lamp.errors import Location, Message_Handler, LAMP_Error, Kind
from lamp.policy import (Exact_Address, Geo_Point, Semantic_Keyword,
                         Time_Interval, Lampi_Policy, Location_Type,
                         Sensitiveness)


class List_Handler(Message_Handler):
    def __init__(self):
        super().__init__()
        self.messages = []

    def emit(self, location, kind, message, fatal=True, code=None):
        assert isinstance(location, Location)
        assert isinstance(kind, Kind)
        assert isinstance(message, str)
        assert isinstance(fatal, bool)

        self.messages.append((location, kind, message, code))

        if fatal:
            err = LAMP_Error(location, kind, message, code)
            err.reported = True
            raise err

    def pop_message(self):
        assert self.messages
        message, self.messages = self.messages[0], self.messages[1:]
        return message


def address(street, city="paris", state="ile-de-france", nation="france",
            lat=None, lon=None):
    point = None if lat is None else Geo_Point(lat, lon)
    return Exact_Address(street, city, state, nation, point)


def exact_policy(pid, owner, where, interval=None, xi=Sensitiveness.HIGH):
    return Lampi_Policy(pid      = pid,
                        owner    = owner,
                        loc      = where,
                        typ      = Location_Type.EXACT,
                        interval = interval or Time_Interval.always(),
                        xi       = xi)


def semantic_policy(pid, owner, keyword, interval=None,
                    xi=Sensitiveness.HIGH):
    return Lampi_Policy(pid      = pid,
                        owner    = owner,
                        loc      = Semantic_Keyword(keyword),
                        typ      = Location_Type.SEMANTIC,
                        interval = interval or Time_Interval.always(),
                        xi       = xi)


def date_range(first, last):
    return Time_Interval(date_range=(datetime.date.fromisoformat(first),
                                     datetime.date.fromisoformat(last)))


def window(start, end):
    return Time_Interval(daily_window=(datetime.time.fromisoformat(start),
                                       datetime.time.fromisoformat(end)))


def at(text):
    return datetime.datetime.fromisoformat(text)


def random_interval(rng):
    choice = rng.random()
    if choice < 0.4:
        return Time_Interval.always()
    first = datetime.date(2019, 1, 1) + \
        datetime.timedelta(days=rng.randrange(365))
    last = first + datetime.timedelta(days=rng.randrange(90))
    start = datetime.time(rng.randrange(24), rng.choice((0, 30)))
    end = datetime.time(rng.randrange(24), rng.choice((0, 30)))
    if choice < 0.6:
        return Time_Interval(date_range=(first, last))
    elif choice < 0.8:
        return Time_Interval(daily_window=(start, end))
    else:
        return Time_Interval(date_range=(first, last),
                             daily_window=(start, end))


def random_timestamp(rng):
    return datetime.datetime(2019, 1, 1) + \
        datetime.timedelta(minutes=rng.randrange(365 * 24 * 60))


def edge_timestamp(rng, interval):
    """A timestamp on, or one second beside, an endpoint of interval"""
    when = random_timestamp(rng)
    day = when.date()
    clock = rng.choice((when.time(),
                        datetime.time(0, 0, 0),
                        datetime.time(23, 59, 59)))
    if interval.date_range is not None and rng.random() < 0.6:
        day = rng.choice(interval.date_range) + \
            datetime.timedelta(days=rng.choice((-1, 0, 0, 1)))
    if interval.daily_window is not None:
        clock = rng.choice(interval.daily_window)
    return datetime.datetime.combine(day, clock) + \
        datetime.timedelta(seconds=rng.choice((-1, 0, 0, 1)))
