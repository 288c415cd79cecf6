"""
auctionlab

Auction mechanisms, reserve-price learning and strategic bidding: Monte
Carlo simulation with cross-checks against known closed forms.
"""

__version__ = "0.1.0"
