"""Dict-scan reference cache for cross-checking ReuseTable.

Same contract, no indexing tricks: any hit, exact or longest-prefix
partial, bumps the matched entry's frequency; eviction takes minimum
frequency, ties broken by oldest insertion.
"""


class NaiveLfu:
    def __init__(self, capacity):
        self.capacity = capacity
        self.entries = {}  # (service, items) -> [frequency, insert_seq]
        self.seq = 0

    def lookup(self, service, descriptor):
        """Returns 'full', 'partial' or 'miss'."""
        row = self.entries.get((service, descriptor.items))
        if row is not None:
            row[0] += 1
            return "full"
        best_key, best_lcp = None, 0
        for (svc, items), row in self.entries.items():
            if svc != service:
                continue
            lcp = 0
            for a, b in zip(descriptor.items, items):
                if a != b:
                    break
                lcp += 1
            if lcp > best_lcp or (lcp == best_lcp and best_key is not None
                                  and row[1] < self.entries[(svc, best_key)][1]):
                best_key, best_lcp = items, lcp
        if best_lcp == 0:
            return "miss"
        self.entries[(service, best_key)][0] += 1
        return "partial"

    def insert(self, service, descriptor):
        evicted = None
        if len(self.entries) >= self.capacity:
            evicted = min(self.entries.items(), key=lambda kv: (kv[1][0], kv[1][1]))[0]
            del self.entries[evicted]
        self.seq += 1
        self.entries[(service, descriptor.items)] = [1, self.seq]
        return evicted
