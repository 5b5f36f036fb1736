# Ticket Availability Tracker