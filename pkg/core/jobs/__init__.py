# Job entry points for Cloud Run Jobs
